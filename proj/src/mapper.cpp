#include "chantop/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace chantop::mapper {
namespace {

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

// Prim's algorithm; the minimum spanning tree edge weights are exactly the
// single-linkage merge distances.
std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>>
mst_edges(std::span<const std::size_t> members, const double* data,
          std::size_t dim) {
  const std::size_t m = members.size();
  std::vector<double> best(m, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best_from(m, 0);
  std::vector<bool> in_tree(m, false);
  std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> edges;
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t added = 1; added < m; ++added) {
    const double* pc = data + members[current] * dim;
    for (std::size_t j = 0; j < m; ++j) {
      if (in_tree[j]) continue;
      double d2 = sq_dist(pc, data + members[j] * dim, dim);
      if (d2 < best[j]) {
        best[j] = d2;
        best_from[j] = current;
      }
    }
    std::size_t pick = m;
    double pick_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j)
      if (!in_tree[j] && best[j] < pick_d) {
        pick_d = best[j];
        pick = j;
      }
    edges.push_back({std::sqrt(pick_d), {best_from[pick], pick}});
    in_tree[pick] = true;
    current = pick;
  }
  return edges;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

double median_int64(std::vector<std::int64_t> v) {
  std::sort(v.begin(), v.end());
  return static_cast<double>(v[(v.size() - 1) / 2]);
}

}  // namespace

Cover build_cover(const embed::FilterEmbedding& embedding, int intervals,
                  double overlap, int dimension) {
  if (intervals < 1) throw std::invalid_argument("intervals must be >= 1");
  if (!(overlap >= 0.0) || !(overlap < 1.0))
    throw std::invalid_argument("overlap must lie in [0, 1)");
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("cover dimension must be 1 or 2");
  if (embedding.n == 0) throw std::invalid_argument("empty embedding");

  Cover cover;
  cover.dimension = dimension;
  cover.intervals = intervals;
  cover.overlap = overlap;

  int axis_bins[2] = {1, 1};
  struct Window {
    double lo, hi;
  };
  std::vector<Window> windows[2];
  for (int a = 0; a < dimension; ++a) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < embedding.n; ++i) {
      double v = a == 0 ? embedding.x(i) : embedding.y(i);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    cover.lo[a] = lo;
    cover.hi[a] = hi;
    double range = hi - lo;
    if (range == 0.0 || intervals == 1) {
      windows[a].push_back({lo, hi});
      axis_bins[a] = 1;
      continue;
    }
    double width =
        range / ((intervals - 1) * (1.0 - overlap) + 1.0);
    double stride = width * (1.0 - overlap);
    for (int i = 0; i < intervals; ++i) {
      double s = lo + i * stride;
      windows[a].push_back({s, s + width});
    }
    // Rounding in lo + i * stride can push the outer edges inside the data
    // range and orphan the extreme points; pin them back.
    windows[a].front().lo = lo;
    windows[a].back().hi = hi;
    axis_bins[a] = intervals;
  }
  if (dimension == 1) {
    windows[1].push_back({0.0, 0.0});
    axis_bins[1] = 1;
  }

  for (int yi = 0; yi < axis_bins[1]; ++yi)
    for (int xi = 0; xi < axis_bins[0]; ++xi) {
      CoverBin bin;
      bin.id = static_cast<std::size_t>(yi) * axis_bins[0] + xi;
      bin.lo[0] = windows[0][xi].lo;
      bin.hi[0] = windows[0][xi].hi;
      bin.lo[1] = windows[1][yi].lo;
      bin.hi[1] = windows[1][yi].hi;
      cover.bins.push_back(bin);
    }

  for (std::size_t i = 0; i < embedding.n; ++i) {
    double px = embedding.x(i);
    double py = embedding.y(i);
    for (auto& bin : cover.bins) {
      if (px < bin.lo[0] || px > bin.hi[0]) continue;
      if (dimension == 2 && (py < bin.lo[1] || py > bin.hi[1])) continue;
      bin.points.push_back(i);
    }
  }
  return cover;
}

std::vector<std::vector<std::size_t>> cluster_bin(
    std::span<const std::size_t> members, const double* data, std::size_t dim,
    int histogram_bins) {
  if (histogram_bins < 2)
    throw std::invalid_argument("histogram needs at least 2 bins");
  if (members.empty()) return {};
  if (members.size() == 1) return {{members[0]}};

  auto edges = mst_edges(members, data, dim);
  double longest = 0.0;
  for (const auto& e : edges) longest = std::max(longest, e.first);

  double threshold = std::numeric_limits<double>::infinity();
  if (longest > 0.0) {
    std::vector<int> histogram(histogram_bins, 0);
    for (const auto& e : edges) {
      auto b = static_cast<int>(e.first / longest * histogram_bins);
      ++histogram[std::min(b, histogram_bins - 1)];
    }
    // A gap is an empty stretch above the shortest merge distances; empty
    // buckets below the first populated one say nothing about the data.
    int b = 0;
    while (b < histogram_bins && histogram[b] == 0) ++b;
    for (; b < histogram_bins; ++b)
      if (histogram[b] == 0) {
        threshold = longest * b / histogram_bins;
        break;
      }
  }

  DisjointSet ds(members.size());
  for (const auto& e : edges)
    if (e.first < threshold) ds.unite(e.second.first, e.second.second);

  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t j = 0; j < members.size(); ++j)
    by_root[ds.find(j)].push_back(members[j]);

  std::vector<std::vector<std::size_t>> clusters;
  for (auto& [root, ids] : by_root) {
    std::sort(ids.begin(), ids.end());
    clusters.push_back(std::move(ids));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return clusters;
}

NerveGraph build_nerve(const Cover& cover, const double* metric_data,
                       std::size_t metric_dim,
                       const normalize::FeatureMatrix& features,
                       const MapperParams& params) {
  NerveGraph graph;
  for (const auto& bin : cover.bins) {
    auto clusters =
        cluster_bin(bin.points, metric_data, metric_dim, params.histogram_bins);
    for (auto& members : clusters) {
      if (members.size() < params.min_node_size) continue;
      ClusterNode node;
      node.id = graph.nodes.size();
      node.bin = bin.id;
      std::vector<std::int64_t> stars;
      for (std::size_t r : members) stars.push_back(features.row_stars[r]);
      node.star_median = median_int64(std::move(stars));
      for (std::size_t c = 0; c < features.cols; ++c) {
        double sum = 0.0;
        for (std::size_t r : members) sum += features.at(r, c);
        node.feature_means[features.col_channels[c]] =
            sum / static_cast<double>(members.size());
      }
      node.members = std::move(members);
      graph.nodes.push_back(std::move(node));
    }
  }

  // Invert point -> nodes, then count co-occurrences.
  std::map<std::size_t, std::vector<std::size_t>> point_nodes;
  for (const auto& node : graph.nodes)
    for (std::size_t r : node.members) point_nodes[r].push_back(node.id);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> shared;
  for (const auto& [point, nodes] : point_nodes)
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        auto key = std::minmax(nodes[i], nodes[j]);
        ++shared[{key.first, key.second}];
      }
  for (const auto& [pair, count] : shared)
    graph.edges.push_back({pair.first, pair.second, count});
  return graph;
}

NerveGraph build_mapper(const embed::FilterEmbedding& embedding,
                        const normalize::FeatureMatrix& features,
                        const MapperParams& params) {
  if (embedding.n != features.rows)
    throw std::invalid_argument(
        "embedding and feature matrix disagree on row count");
  Cover cover = build_cover(embedding, params.intervals, params.overlap,
                            params.dimension);
  const double* metric = params.cluster_in_embedding ? embedding.coords.data()
                                                     : features.values.data();
  std::size_t dim = params.cluster_in_embedding ? 2 : features.cols;
  return build_nerve(cover, metric, dim, features, params);
}

std::vector<double> color_by_feature(const NerveGraph& graph,
                                     const std::string& channel) {
  std::vector<double> colors;
  colors.reserve(graph.nodes.size());
  for (const auto& node : graph.nodes) {
    auto it = node.feature_means.find(channel);
    if (it == node.feature_means.end())
      throw std::invalid_argument("channel not in graph features: " + channel);
    colors.push_back(it->second);
  }
  return colors;
}

}  // namespace chantop::mapper
