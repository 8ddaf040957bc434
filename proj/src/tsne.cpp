#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "chantop/embed.hpp"
#include "chantop/kernels.hpp"
#include "chantop/rng.hpp"

namespace chantop::embed {
namespace {

void check_params(const TsneParams& p) {
  if (p.iterations <= 0)
    throw std::invalid_argument("iterations must be positive");
  if (p.learning_rate <= 0.0)
    throw std::invalid_argument("learning rate must be positive");
  if (p.exaggeration < 1.0)
    throw std::invalid_argument("exaggeration must be at least 1");
  if (p.init_stddev <= 0.0)
    throw std::invalid_argument("init stddev must be positive");
}

void zero_mean(std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

}  // namespace

FilterEmbedding tsne_points(const double* x, std::size_t n, std::size_t d,
                            const TsneParams& params,
                            TsneDiagnostics* diagnostics) {
  check_params(params);
  AffinityMatrix aff = conditional_affinities(x, n, d, params.perplexity);
  const auto& k = kern::active_kernels();

  std::vector<double>& p = aff.p;
  for (double& v : p) v *= params.exaggeration;
  bool exaggerated = true;

  std::vector<double> y0(n), y1(n), u0(n, 0.0), u1(n, 0.0);
  std::vector<double> gain0(n, 1.0), gain1(n, 1.0), g0(n), g1(n);
  std::vector<double> w(n * n);
  Rng rng(params.seed);
  for (std::size_t i = 0; i < n; ++i) {
    y0[i] = rng.gaussian() * params.init_stddev;
    y1[i] = rng.gaussian() * params.init_stddev;
  }

  FilterEmbedding out;
  out.n = n;
  out.method = EmbedMethod::Tsne;

  auto step_plane = [&](std::vector<double>& y, std::vector<double>& u,
                        std::vector<double>& gain, const std::vector<double>& g,
                        double momentum) {
    for (std::size_t i = 0; i < n; ++i) {
      bool same_sign = (g[i] > 0.0) == (u[i] > 0.0);
      gain[i] = same_sign ? gain[i] * 0.8 : gain[i] + 0.2;
      if (gain[i] < 0.01) gain[i] = 0.01;
      u[i] = momentum * u[i] - params.learning_rate * gain[i] * g[i];
      y[i] += u[i];
      if (!std::isfinite(y[i]))
        throw std::runtime_error("embedding diverged");
    }
  };

  double kl_post_exaggeration = 0.0;
  for (int iter = 0; iter < params.iterations; ++iter) {
    if (exaggerated && iter >= params.exaggeration_iters) {
      for (double& v : p) v /= params.exaggeration;
      exaggerated = false;
      double sum_w = k.studentt_weights(y0.data(), y1.data(), n, w.data());
      kl_post_exaggeration = k.kl_divergence(p.data(), w.data(), sum_w, n);
    }
    double sum_w = k.studentt_weights(y0.data(), y1.data(), n, w.data());
    k.kl_gradient(p.data(), w.data(), sum_w, y0.data(), y1.data(), n,
                  g0.data(), g1.data());
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(g0[i]) || !std::isfinite(g1[i]))
        throw std::runtime_error("non-finite gradient at iteration " +
                                 std::to_string(iter));
    double momentum = iter < params.momentum_switch_iter
                          ? params.momentum_early
                          : params.momentum_late;
    try {
      step_plane(y0, u0, gain0, g0, momentum);
      step_plane(y1, u1, gain1, g1, momentum);
    } catch (const std::runtime_error&) {
      throw std::runtime_error("embedding diverged at iteration " +
                               std::to_string(iter));
    }
    zero_mean(y0);
    zero_mean(y1);
    if (diagnostics != nullptr &&
        ((iter + 1) % 100 == 0 || iter + 1 == params.iterations)) {
      double sw = k.studentt_weights(y0.data(), y1.data(), n, w.data());
      diagnostics->kl_by_iter.emplace_back(
          iter + 1, k.kl_divergence(p.data(), w.data(), sw, n));
    }
  }

  if (exaggerated) {
    // Fewer iterations than the exaggeration phase: settle the books here.
    for (double& v : p) v /= params.exaggeration;
  }
  double sum_w = k.studentt_weights(y0.data(), y1.data(), n, w.data());
  out.final_objective = k.kl_divergence(p.data(), w.data(), sum_w, n);
  out.kl_post_exaggeration =
      exaggerated ? out.final_objective : kl_post_exaggeration;
  if (diagnostics != nullptr)
    diagnostics->kl_regressed =
        out.final_objective > out.kl_post_exaggeration;

  out.coords.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.coords[2 * i] = y0[i];
    out.coords[2 * i + 1] = y1[i];
  }
  return out;
}

FilterEmbedding tsne(const normalize::FeatureMatrix& m,
                     const TsneParams& params, TsneDiagnostics* diagnostics) {
  return tsne_points(m.values.data(), m.rows, m.cols, params, diagnostics);
}

}  // namespace chantop::embed
