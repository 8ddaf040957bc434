#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "chantop/embed.hpp"
#include "chantop/kernels.hpp"

namespace chantop::embed {
namespace {

// Shannon entropy (nats) and conditional row p_{j|i} for one bandwidth.
// Distances are shifted by their minimum before exponentiation; the
// resulting distribution and entropy are unchanged by the shift.
double row_entropy(const double* dists, std::size_t n, std::size_t skip,
                   double beta, double* row) {
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    if (j != skip) dmin = std::min(dmin, dists[j]);
  double sum = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == skip) {
      row[j] = 0.0;
      continue;
    }
    double shifted = dists[j] - dmin;
    double pj = std::exp(-beta * shifted);
    row[j] = pj;
    sum += pj;
    weighted += shifted * pj;
  }
  for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
  return std::log(sum) + beta * weighted / sum;
}

}  // namespace

AffinityMatrix conditional_affinities(const double* x, std::size_t n,
                                      std::size_t d, double perplexity) {
  if (n < 3)
    throw std::invalid_argument("affinities need at least 3 points");
  if (!(perplexity > 1.0) || !(perplexity < static_cast<double>(n)))
    throw std::invalid_argument(
        "perplexity must lie strictly between 1 and the point count");

  std::vector<double> dists(n * n);
  kern::active_kernels().pairwise_sq_dists(x, n, d, dists.data());

  AffinityMatrix out;
  out.n = n;
  out.p.assign(n * n, 0.0);
  out.sigmas.assign(n, 0.0);

  const double target = std::log(perplexity);
  constexpr double tol = 1e-7;
  constexpr double beta_limit = 1e300;
  constexpr int max_steps = 64;

  for (std::size_t i = 0; i < n; ++i) {
    const double* di = dists.data() + i * n;
    double* row = out.p.data() + i * n;
    double beta = 1.0;
    double diff = row_entropy(di, n, i, beta, row) - target;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    bool clamped = false;
    for (int step = 0; std::abs(diff) > tol; ++step) {
      if (step >= max_steps) {
        if (std::isinf(hi) || lo == 0.0) {
          // Target perplexity unreachable for this row (e.g. duplicated
          // points); keep the limiting distribution.
          clamped = true;
          break;
        }
        throw std::runtime_error(
            "bandwidth search failed to converge for point " +
            std::to_string(i));
      }
      if (diff > 0.0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (lo + hi) / 2.0;
      } else {
        hi = beta;
        beta = (lo == 0.0) ? beta / 2.0 : (lo + hi) / 2.0;
      }
      if (beta > beta_limit || beta < 1.0 / beta_limit) {
        clamped = true;
        beta = std::clamp(beta, 1.0 / beta_limit, beta_limit);
        row_entropy(di, n, i, beta, row);
        break;
      }
      diff = row_entropy(di, n, i, beta, row) - target;
    }
    (void)clamped;
    out.sigmas[i] = std::sqrt(0.5 / beta);
  }

  // Symmetrize in place: p_ij = (p_{j|i} + p_{i|j}) / (2n), which keeps the
  // grand total at one.
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    out.p[i * n + i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = (out.p[i * n + j] + out.p[j * n + i]) * scale;
      out.p[i * n + j] = v;
      out.p[j * n + i] = v;
    }
  }
  return out;
}

AffinityMatrix conditional_affinities(const normalize::FeatureMatrix& m,
                                      double perplexity) {
  return conditional_affinities(m.values.data(), m.rows, m.cols, perplexity);
}

}  // namespace chantop::embed
