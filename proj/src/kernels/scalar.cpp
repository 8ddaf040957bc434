#include "chantop/kernels.hpp"

#include <cmath>

namespace chantop::kern {
namespace {

void sq_dists_scalar(const double* x, std::size_t n, std::size_t d,
                     double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i * n + i] = 0.0;
    const double* xi = x + i * d;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* xj = x + j * d;
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        double diff = xi[k] - xj[k];
        acc += diff * diff;
      }
      out[i * n + j] = acc;
      out[j * n + i] = acc;
    }
  }
}

double studentt_scalar(const double* y0, const double* y1, std::size_t n,
                       double* w) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double yi0 = y0[i];
    double yi1 = y1[i];
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double dx = yi0 - y0[j];
      double dy = yi1 - y1[j];
      w[i * n + j] = 1.0 / (1.0 + dx * dx + dy * dy);
      row += w[i * n + j];
    }
    w[i * n + i] = 0.0;
    sum += row - 1.0;  // remove the diagonal contribution 1/(1+0)
  }
  return sum;
}

void gradient_scalar(const double* p, const double* w, double sum_w,
                     const double* y0, const double* y1, std::size_t n,
                     double* g0, double* g1) {
  const double inv_sum = 1.0 / sum_w;
  for (std::size_t i = 0; i < n; ++i) {
    double yi0 = y0[i];
    double yi1 = y1[i];
    double a0 = 0.0;
    double a1 = 0.0;
    const double* pi = p + i * n;
    const double* wi = w + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      double mult = (pi[j] - wi[j] * inv_sum) * wi[j];
      a0 += mult * (yi0 - y0[j]);
      a1 += mult * (yi1 - y1[j]);
    }
    g0[i] = 4.0 * a0;
    g1[i] = 4.0 * a1;
  }
}

double kl_scalar(const double* p, const double* w, double sum_w,
                 std::size_t n) {
  constexpr double eps = 1e-12;
  const double inv_sum = 1.0 / sum_w;
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double pij = p[i * n + j];
      if (pij <= 0.0) continue;
      double qij = w[i * n + j] * inv_sum;
      c += pij * std::log(pij / (qij > eps ? qij : eps));
    }
  }
  return c;
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar", sq_dists_scalar, studentt_scalar,
                         gradient_scalar, kl_scalar};
  return k;
}

}  // namespace chantop::kern
