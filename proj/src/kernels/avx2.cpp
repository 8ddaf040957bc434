#include "chantop/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <vector>

namespace chantop::kern {
namespace {

inline double hsum(__m256d v) {
  // Fixed lane order keeps results reproducible run to run.
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void sq_dists_avx2(const double* x, std::size_t n, std::size_t d,
                   double* out) {
  // Column-major copy so the inner loop streams over contiguous j.
  std::vector<double> col(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) col[k * n + i] = x[i * d + k];

  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * d;
    double* row = out + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < d; ++k) {
        __m256d xik = _mm256_set1_pd(xi[k]);
        __m256d xjk = _mm256_loadu_pd(col.data() + k * n + j);
        __m256d diff = _mm256_sub_pd(xik, xjk);
        acc = _mm256_fmadd_pd(diff, diff, acc);
      }
      _mm256_storeu_pd(row + j, acc);
    }
    for (; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        double diff = xi[k] - x[j * d + k];
        acc += diff * diff;
      }
      row[j] = acc;
    }
    row[i] = 0.0;
  }
}

double studentt_avx2(const double* y0, const double* y1, std::size_t n,
                     double* w) {
  const __m256d one = _mm256_set1_pd(1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const __m256d yi0 = _mm256_set1_pd(y0[i]);
    const __m256d yi1 = _mm256_set1_pd(y1[i]);
    __m256d acc = _mm256_setzero_pd();
    double* row = w + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d dx = _mm256_sub_pd(yi0, _mm256_loadu_pd(y0 + j));
      __m256d dy = _mm256_sub_pd(yi1, _mm256_loadu_pd(y1 + j));
      __m256d d2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
      __m256d wij = _mm256_div_pd(one, _mm256_add_pd(one, d2));
      _mm256_storeu_pd(row + j, wij);
      acc = _mm256_add_pd(acc, wij);
    }
    double row_sum = hsum(acc);
    for (; j < n; ++j) {
      double dx = y0[i] - y0[j];
      double dy = y1[i] - y1[j];
      row[j] = 1.0 / (1.0 + dx * dx + dy * dy);
      row_sum += row[j];
    }
    row[i] = 0.0;
    sum += row_sum - 1.0;
  }
  return sum;
}

void gradient_avx2(const double* p, const double* w, double sum_w,
                   const double* y0, const double* y1, std::size_t n,
                   double* g0, double* g1) {
  const double inv_sum = 1.0 / sum_w;
  const __m256d vinv = _mm256_set1_pd(inv_sum);
  for (std::size_t i = 0; i < n; ++i) {
    const __m256d yi0 = _mm256_set1_pd(y0[i]);
    const __m256d yi1 = _mm256_set1_pd(y1[i]);
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    const double* pi = p + i * n;
    const double* wi = w + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d wj = _mm256_loadu_pd(wi + j);
      __m256d pj = _mm256_loadu_pd(pi + j);
      __m256d mult = _mm256_mul_pd(
          _mm256_sub_pd(pj, _mm256_mul_pd(wj, vinv)), wj);
      __m256d dx = _mm256_sub_pd(yi0, _mm256_loadu_pd(y0 + j));
      __m256d dy = _mm256_sub_pd(yi1, _mm256_loadu_pd(y1 + j));
      a0 = _mm256_fmadd_pd(mult, dx, a0);
      a1 = _mm256_fmadd_pd(mult, dy, a1);
    }
    double s0 = hsum(a0);
    double s1 = hsum(a1);
    for (; j < n; ++j) {
      double mult = (pi[j] - wi[j] * inv_sum) * wi[j];
      s0 += mult * (y0[i] - y0[j]);
      s1 += mult * (y1[i] - y1[j]);
    }
    g0[i] = 4.0 * s0;
    g1[i] = 4.0 * s1;
  }
}

}  // namespace

const Kernels* avx2_kernels() {
  static const Kernels k{"avx2", sq_dists_avx2, studentt_avx2, gradient_avx2,
                         scalar_kernels().kl_divergence};
  return &k;
}

}  // namespace chantop::kern

#else

namespace chantop::kern {

const Kernels* avx2_kernels() { return nullptr; }

}  // namespace chantop::kern

#endif
