#pragma once

#include <cstdint>
#include <vector>

#include "chantop/normalize.hpp"

namespace chantop::embed {

struct TsneParams {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double momentum_early = 0.5;
  double momentum_late = 0.8;
  int momentum_switch_iter = 250;
  double exaggeration = 12.0;
  int exaggeration_iters = 250;
  double init_stddev = 1e-4;
  std::uint64_t seed = 42;
};

// Symmetric pairwise similarities: p_ij >= 0, zero diagonal, total sum 1.
struct AffinityMatrix {
  std::size_t n = 0;
  std::vector<double> p;       // n * n
  std::vector<double> sigmas;  // per-point Gaussian bandwidth

  double at(std::size_t i, std::size_t j) const { return p[i * n + j]; }
};

// Per-row Gaussian bandwidths are found by bisection so that each row of
// conditional probabilities has perplexity 2^H equal to the target. Rows
// whose target is unreachable (duplicate-heavy data) keep the limiting
// distribution instead of failing. Requires 3 <= n and 1 < perplexity < n.
AffinityMatrix conditional_affinities(const double* x, std::size_t n,
                                      std::size_t d, double perplexity);
AffinityMatrix conditional_affinities(const normalize::FeatureMatrix& m,
                                      double perplexity);

enum class EmbedMethod { Tsne, Pca };

struct FilterEmbedding {
  std::size_t n = 0;
  std::vector<double> coords;  // n x 2 row-major
  EmbedMethod method = EmbedMethod::Tsne;
  double final_objective = 0.0;       // final KL, or cumulative variance ratio
  double kl_post_exaggeration = 0.0;  // t-SNE only

  double x(std::size_t i) const { return coords[2 * i]; }
  double y(std::size_t i) const { return coords[2 * i + 1]; }
};

struct TsneDiagnostics {
  std::vector<std::pair<int, double>> kl_by_iter;
  bool kl_regressed = false;  // final KL exceeded end-of-exaggeration KL
};

// Gradient-descent layout of the affinity structure into the plane.
// Deterministic for fixed params and input. Throws std::runtime_error
// naming the iteration if the optimization produces non-finite values.
FilterEmbedding tsne(const normalize::FeatureMatrix& m,
                     const TsneParams& params,
                     TsneDiagnostics* diagnostics = nullptr);
FilterEmbedding tsne_points(const double* x, std::size_t n, std::size_t d,
                            const TsneParams& params,
                            TsneDiagnostics* diagnostics = nullptr);

struct PcaResult {
  FilterEmbedding embedding;               // first two component scores
  std::size_t d = 0;                       // input dimension
  std::size_t k = 0;                       // components kept
  std::vector<double> components;          // k x d row-major, unit rows
  std::vector<double> explained_variance_ratio;  // length k
  std::vector<double> scores;              // n x k row-major
  std::vector<double> mean;                // length d
};

// Principal components of the centered matrix with a deterministic sign
// convention: the entry of largest magnitude in each component is positive.
// Requires 1 <= k <= columns.
PcaResult pca(const normalize::FeatureMatrix& m, std::size_t k);
PcaResult pca_points(const double* x, std::size_t n, std::size_t d,
                     std::size_t k);

}  // namespace chantop::embed
