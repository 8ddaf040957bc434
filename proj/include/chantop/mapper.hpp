#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chantop/embed.hpp"
#include "chantop/normalize.hpp"

namespace chantop::mapper {

struct CoverBin {
  std::size_t id = 0;
  double lo[2] = {0.0, 0.0};
  double hi[2] = {0.0, 0.0};
  std::vector<std::size_t> points;  // ascending row indices
};

// Overlapping interval cover of the embedding's bounding box. With k windows
// per axis at overlap g, the window width is range / ((k-1)*(1-g) + 1) and
// consecutive windows advance by width*(1-g). An axis where every point
// coincides collapses to a single window.
struct Cover {
  int dimension = 2;  // 1 uses only the first coordinate
  int intervals = 10;
  double overlap = 0.5;
  double lo[2] = {0.0, 0.0};
  double hi[2] = {0.0, 0.0};
  std::vector<CoverBin> bins;
};

// Requires intervals >= 1 and 0 <= overlap < 1. Every point lands in at
// least one bin; closed windows mean boundary points land in several.
Cover build_cover(const embed::FilterEmbedding& embedding, int intervals,
                  double overlap, int dimension = 2);

// Single-linkage clustering of one bin's members, measured in the metric
// space given by data (row-major, dim columns). The dendrogram is cut at the
// first empty bin of a histogram over merge distances (histogram_bins bins
// spanning [0, longest merge]); no empty bin means one cluster. Returns
// disjoint ascending member lists covering the input, ordered by smallest
// member.
std::vector<std::vector<std::size_t>> cluster_bin(
    std::span<const std::size_t> members, const double* data, std::size_t dim,
    int histogram_bins = 10);

struct ClusterNode {
  std::size_t id = 0;
  std::size_t bin = 0;
  std::vector<std::size_t> members;  // ascending row indices
  std::map<std::string, double> feature_means;
  double star_median = 0.0;

  bool operator==(const ClusterNode&) const = default;
};

struct NerveEdge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  std::size_t shared = 0;  // points in both member sets

  bool operator==(const NerveEdge&) const = default;
  auto operator<=>(const NerveEdge&) const = default;
};

struct NerveGraph {
  std::vector<ClusterNode> nodes;  // ordered by (bin, smallest member)
  std::vector<NerveEdge> edges;    // ordered by (a, b)

  bool operator==(const NerveGraph&) const = default;
};

struct MapperParams {
  int intervals = 10;
  double overlap = 0.5;
  int dimension = 2;
  int histogram_bins = 10;
  bool cluster_in_embedding = false;  // default metric: feature space
  std::size_t min_node_size = 1;
};

// One node per bin-level cluster; an edge joins two nodes exactly when they
// share at least one point. Nodes smaller than min_node_size are dropped
// before edges are formed.
NerveGraph build_nerve(const Cover& cover, const double* metric_data,
                       std::size_t metric_dim,
                       const normalize::FeatureMatrix& features,
                       const MapperParams& params);

// Cover + clustering + nerve in one call.
NerveGraph build_mapper(const embed::FilterEmbedding& embedding,
                        const normalize::FeatureMatrix& features,
                        const MapperParams& params);

// Mean normalized value of one channel per node, in node order. The channel
// must be one of the matrix columns used to build the graph.
std::vector<double> color_by_feature(const NerveGraph& graph,
                                     const std::string& channel);

}  // namespace chantop::mapper
