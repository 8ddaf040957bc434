#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "chantop/embed.hpp"
#include "chantop/rng.hpp"

using namespace chantop;

namespace {

// Eigen-decomposition of the sample covariance by cyclic Jacobi rotations.
// Slow and simple on purpose: a second, independent route to the principal
// axes that the SVD-based production path must agree with.
struct EigenOracle {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // row c = eigenvector c
};

EigenOracle jacobi_covariance(const std::vector<double>& x, std::size_t n,
                              std::size_t d) {
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x[i * d + j];
  for (auto& m : mean) m /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        cov[a * d + b] += (x[i * d + a] - mean[a]) * (x[i * d + b] - mean[b]);

  std::vector<double> v(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += std::abs(cov[p * d + q]);
    if (off < 1e-14) break;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) {
        double apq = cov[p * d + q];
        if (std::abs(apq) < 1e-300) continue;
        double theta = (cov[q * d + q] - cov[p * d + p]) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t r = 0; r < d; ++r) {
          double arp = cov[r * d + p];
          double arq = cov[r * d + q];
          cov[r * d + p] = c * arp - s * arq;
          cov[r * d + q] = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < d; ++r) {
          double apr = cov[p * d + r];
          double aqr = cov[q * d + r];
          cov[p * d + r] = c * apr - s * aqr;
          cov[q * d + r] = s * apr + c * aqr;
        }
        for (std::size_t r = 0; r < d; ++r) {
          double vrp = v[r * d + p];
          double vrq = v[r * d + q];
          v[r * d + p] = c * vrp - s * vrq;
          v[r * d + q] = s * vrp + c * vrq;
        }
      }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cov[a * d + a] > cov[b * d + b];
  });

  EigenOracle out;
  out.values.resize(d);
  out.vectors.resize(d * d);
  for (std::size_t c = 0; c < d; ++c) {
    out.values[c] = cov[order[c] * d + order[c]];
    for (std::size_t r = 0; r < d; ++r)
      out.vectors[c * d + r] = v[r * d + order[c]];
  }
  return out;
}

std::vector<double> random_matrix(std::size_t n, std::size_t d,
                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n * d);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

}  // namespace

TEST_CASE("components match the covariance eigenvector oracle") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t n = 5;
    const std::size_t d = 3;
    auto x = random_matrix(n, d, seed);
    auto my = embed::pca_points(x.data(), n, d, d);
    auto oracle = jacobi_covariance(x, n, d);

    double trace = 0.0;
    for (double ev : oracle.values) trace += ev;
    for (std::size_t c = 0; c < d; ++c) {
      // Orientation is a convention; compare up to sign.
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j)
        dot += my.components[c * d + j] * oracle.vectors[c * d + j];
      double sign = dot < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < d; ++j)
        CHECK(my.components[c * d + j] ==
              doctest::Approx(sign * oracle.vectors[c * d + j])
                  .epsilon(1e-8));
      CHECK(my.explained_variance_ratio[c] ==
            doctest::Approx(oracle.values[c] / trace).epsilon(1e-8));
    }
  }
}

TEST_CASE("components are orthonormal") {
  const std::size_t n = 40;
  const std::size_t d = 6;
  auto x = random_matrix(n, d, 77);
  auto my = embed::pca_points(x.data(), n, d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j)
        dot += my.components[a * d + j] * my.components[b * d + j];
      CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10));
    }
}

TEST_CASE("sign convention puts the largest loading up") {
  const std::size_t n = 30;
  const std::size_t d = 4;
  auto x = random_matrix(n, d, 99);
  auto my = embed::pca_points(x.data(), n, d, d);
  for (std::size_t c = 0; c < d; ++c) {
    double best = 0.0;
    for (std::size_t j = 0; j < d; ++j)
      if (std::abs(my.components[c * d + j]) > std::abs(best))
        best = my.components[c * d + j];
    CHECK(best > 0.0);
  }
}

TEST_CASE("rank-1 data explains all variance on the first axis") {
  const std::size_t n = 25;
  const std::size_t d = 5;
  Rng rng(3);
  std::vector<double> direction(d);
  for (auto& v : direction) v = rng.uniform(-1.0, 1.0);
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    double t = rng.uniform(-2.0, 2.0);
    for (std::size_t j = 0; j < d; ++j) x[i * d + j] = t * direction[j];
  }
  auto my = embed::pca_points(x.data(), n, d, 2);
  CHECK(my.explained_variance_ratio[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(my.explained_variance_ratio[1] ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(my.embedding.final_objective == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scores reproduce the centered data projection") {
  const std::size_t n = 15;
  const std::size_t d = 4;
  auto x = random_matrix(n, d, 55);
  auto my = embed::pca_points(x.data(), n, d, 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < 2; ++c) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j)
        dot += (x[i * d + j] - my.mean[j]) * my.components[c * d + j];
      CHECK(my.scores[i * 2 + c] == doctest::Approx(dot).epsilon(1e-10));
    }
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(my.embedding.x(i) == my.scores[i * 2]);
    CHECK(my.embedding.y(i) == my.scores[i * 2 + 1]);
  }
}

TEST_CASE("constant matrix has zero variance ratios") {
  std::vector<double> x(12, 0.75);
  auto my = embed::pca_points(x.data(), 4, 3, 2);
  CHECK(my.explained_variance_ratio[0] == 0.0);
  CHECK(my.explained_variance_ratio[1] == 0.0);
}

TEST_CASE("component count validation") {
  auto x = random_matrix(6, 3, 2);
  CHECK_THROWS_AS(embed::pca_points(x.data(), 6, 3, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(embed::pca_points(x.data(), 6, 3, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(embed::pca_points(x.data(), 0, 3, 1),
                  std::invalid_argument);
}
