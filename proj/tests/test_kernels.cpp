#include "chantop/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include <doctest.h>

#include "chantop/rng.hpp"

namespace {

using chantop::Rng;
using namespace chantop::kern;

std::vector<double> random_points(std::size_t n, std::size_t d,
                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n * d);
  for (auto& v : x) v = rng.uniform(-2.0, 2.0);
  return x;
}

// Textbook double loops, kept deliberately naive so the production kernels
// are checked against a second derivation of the same formulas.
void naive_sq_dists(const std::vector<double>& x, std::size_t n, std::size_t d,
                    std::vector<double>& out) {
  out.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        double diff = x[i * d + k] - x[j * d + k];
        s += diff * diff;
      }
      out[i * n + j] = s;
    }
}

double naive_weights(const std::vector<double>& y0,
                     const std::vector<double>& y1, std::size_t n,
                     std::vector<double>& w) {
  w.assign(n * n, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double dx = y0[i] - y0[j];
      double dy = y1[i] - y1[j];
      w[i * n + j] = 1.0 / (1.0 + dx * dx + dy * dy);
      sum += w[i * n + j];
    }
  return sum;
}

void naive_gradient(const std::vector<double>& p, const std::vector<double>& w,
                    double sum_w, const std::vector<double>& y0,
                    const std::vector<double>& y1, std::size_t n,
                    std::vector<double>& g0, std::vector<double>& g1) {
  g0.assign(n, 0.0);
  g1.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double mult = (p[i * n + j] - w[i * n + j] / sum_w) * w[i * n + j];
      g0[i] += 4.0 * mult * (y0[i] - y0[j]);
      g1[i] += 4.0 * mult * (y1[i] - y1[j]);
    }
}

double naive_kl(const std::vector<double>& p, const std::vector<double>& w,
                double sum_w, std::size_t n) {
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double pij = p[i * n + j];
      if (pij <= 0.0) continue;
      double qij = std::max(w[i * n + j] / sum_w, 1e-12);
      kl += pij * std::log(std::max(pij, 1e-12) / qij);
    }
  return kl;
}

struct Instance {
  std::size_t n;
  std::vector<double> p, y0, y1;
};

Instance make_instance(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Instance inst;
  inst.n = n;
  inst.y0.resize(n);
  inst.y1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    inst.y0[i] = rng.uniform(-3.0, 3.0);
    inst.y1[i] = rng.uniform(-3.0, 3.0);
  }
  inst.p.assign(n * n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = rng.uniform(0.0, 1.0);
      inst.p[i * n + j] = v;
      inst.p[j * n + i] = v;
      total += 2.0 * v;
    }
  for (auto& v : inst.p) v /= total;
  return inst;
}

void check_kernels_against_naive(const Kernels& k) {
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 13u, 17u, 32u, 33u}) {
    const std::size_t d = 1 + n % 7;
    auto x = random_points(n, d, 1000 + n);
    std::vector<double> expect, got(n * n, -1.0);
    naive_sq_dists(x, n, d, expect);
    k.pairwise_sq_dists(x.data(), n, d, got.data());
    for (std::size_t i = 0; i < n * n; ++i)
      CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < n; ++i) CHECK(got[i * n + i] == 0.0);

    auto inst = make_instance(n, 2000 + n);
    std::vector<double> w_expect, w_got(n * n, -1.0);
    double sum_expect = naive_weights(inst.y0, inst.y1, n, w_expect);
    double sum_got =
        k.studentt_weights(inst.y0.data(), inst.y1.data(), n, w_got.data());
    CHECK(sum_got == doctest::Approx(sum_expect).epsilon(1e-12));
    for (std::size_t i = 0; i < n * n; ++i)
      CHECK(w_got[i] == doctest::Approx(w_expect[i]).epsilon(1e-12));

    if (n < 2) continue;
    std::vector<double> g0e, g1e, g0(n, 0.0), g1(n, 0.0);
    naive_gradient(inst.p, w_expect, sum_expect, inst.y0, inst.y1, n, g0e,
                   g1e);
    k.kl_gradient(inst.p.data(), w_got.data(), sum_got, inst.y0.data(),
                  inst.y1.data(), n, g0.data(), g1.data());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(g0[i] == doctest::Approx(g0e[i]).epsilon(1e-10));
      CHECK(g1[i] == doctest::Approx(g1e[i]).epsilon(1e-10));
    }

    double kl_expect = naive_kl(inst.p, w_expect, sum_expect, n);
    double kl_got = k.kl_divergence(inst.p.data(), w_got.data(), sum_got, n);
    CHECK(kl_got == doctest::Approx(kl_expect).epsilon(1e-12));
  }
}

}  // namespace

TEST_CASE("scalar kernels match naive formulas") {
  check_kernels_against_naive(scalar_kernels());
}

TEST_CASE("avx2 kernels match naive formulas") {
  if (!cpu_supports_avx2_fma()) return;
  REQUIRE(avx2_kernels() != nullptr);
  check_kernels_against_naive(*avx2_kernels());
}

TEST_CASE("scalar and avx2 agree to round-off") {
  if (!cpu_supports_avx2_fma()) return;
  const Kernels& s = scalar_kernels();
  const Kernels& v = *avx2_kernels();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const std::size_t n = 50 + seed;
    const std::size_t d = 13;
    auto x = random_points(n, d, seed);
    std::vector<double> ds(n * n), dv(n * n);
    s.pairwise_sq_dists(x.data(), n, d, ds.data());
    v.pairwise_sq_dists(x.data(), n, d, dv.data());
    for (std::size_t i = 0; i < n * n; ++i)
      CHECK(dv[i] == doctest::Approx(ds[i]).epsilon(1e-13));

    auto inst = make_instance(n, seed + 40);
    std::vector<double> ws(n * n), wv(n * n);
    double sum_s = s.studentt_weights(inst.y0.data(), inst.y1.data(), n,
                                      ws.data());
    double sum_v = v.studentt_weights(inst.y0.data(), inst.y1.data(), n,
                                      wv.data());
    CHECK(sum_v == doctest::Approx(sum_s).epsilon(1e-13));
    std::vector<double> g0s(n), g1s(n), g0v(n), g1v(n);
    s.kl_gradient(inst.p.data(), ws.data(), sum_s, inst.y0.data(),
                  inst.y1.data(), n, g0s.data(), g1s.data());
    v.kl_gradient(inst.p.data(), wv.data(), sum_v, inst.y0.data(),
                  inst.y1.data(), n, g0v.data(), g1v.data());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(g0v[i] == doctest::Approx(g0s[i]).epsilon(1e-11));
      CHECK(g1v[i] == doctest::Approx(g1s[i]).epsilon(1e-11));
    }
  }
}

TEST_CASE("kernel selection") {
  auto names = available_kernel_names();
  CHECK(std::find(names.begin(), names.end(), "scalar") != names.end());

  force_kernels("scalar");
  CHECK(std::string(active_kernels().isa) == "scalar");
  if (cpu_supports_avx2_fma()) {
    force_kernels("avx2");
    CHECK(std::string(active_kernels().isa) == "avx2");
  }
  force_kernels("auto");
  CHECK_THROWS_AS(force_kernels("sse9"), std::invalid_argument);
}
