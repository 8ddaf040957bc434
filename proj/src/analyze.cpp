#include "chantop/analyze.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace chantop::analyze {
namespace {

void check_thresholds(const Thresholds& t) {
  if (!(t.dominant > 0.0) || !(t.strong > t.dominant) || !(t.strong <= 1.0))
    throw std::invalid_argument(
        "thresholds must satisfy 0 < dominant < strong <= 1");
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

ClusterComponent make_component(std::vector<std::size_t> node_ids,
                                const mapper::NerveGraph& graph,
                                const normalize::FeatureMatrix& features) {
  ClusterComponent comp;
  std::sort(node_ids.begin(), node_ids.end());
  comp.node_ids = std::move(node_ids);
  for (std::size_t id : comp.node_ids)
    comp.point_ids.insert(comp.point_ids.end(),
                          graph.nodes[id].members.begin(),
                          graph.nodes[id].members.end());
  std::sort(comp.point_ids.begin(), comp.point_ids.end());
  comp.point_ids.erase(
      std::unique(comp.point_ids.begin(), comp.point_ids.end()),
      comp.point_ids.end());
  comp.total_points = comp.point_ids.size();
  std::vector<std::int64_t> stars;
  stars.reserve(comp.point_ids.size());
  for (std::size_t r : comp.point_ids) stars.push_back(features.row_stars[r]);
  std::sort(stars.begin(), stars.end());
  comp.star_median = static_cast<double>(stars[(stars.size() - 1) / 2]);
  return comp;
}

void rank_in_place(std::vector<ClusterComponent>& comps) {
  std::sort(comps.begin(), comps.end(),
            [](const ClusterComponent& a, const ClusterComponent& b) {
              if (a.total_points != b.total_points)
                return a.total_points > b.total_points;
              return a.point_ids.front() < b.point_ids.front();
            });
  for (std::size_t i = 0; i < comps.size(); ++i) comps[i].rank = i + 1;
}

// Pads UTF-8 cells whose display width differs from the byte count.
std::string pad(const std::string& cell, std::size_t display_width,
                std::size_t column_width) {
  std::string out = cell;
  for (std::size_t i = display_width; i < column_width; ++i) out.push_back(' ');
  return out;
}

std::size_t mark_width(DominanceLevel level) {
  return level == DominanceLevel::StronglyDominant ? 2 : 1;
}

}  // namespace

std::string to_string(DominanceLevel level) {
  switch (level) {
    case DominanceLevel::Absent: return "absent";
    case DominanceLevel::Dominant: return "dominant";
    case DominanceLevel::StronglyDominant: return "strongly_dominant";
  }
  return "?";
}

std::string mark(DominanceLevel level) {
  switch (level) {
    case DominanceLevel::Absent: return "-";
    case DominanceLevel::Dominant: return "✓";
    case DominanceLevel::StronglyDominant: return "✓✓";
  }
  return "?";
}

std::vector<ClusterComponent> rank_components(
    const mapper::NerveGraph& graph,
    const normalize::FeatureMatrix& features) {
  if (graph.nodes.empty()) return {};
  DisjointSet ds(graph.nodes.size());
  for (const auto& e : graph.edges) ds.unite(e.a, e.b);
  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (const auto& node : graph.nodes)
    by_root[ds.find(node.id)].push_back(node.id);
  std::vector<ClusterComponent> comps;
  for (auto& [root, ids] : by_root)
    comps.push_back(make_component(std::move(ids), graph, features));
  rank_in_place(comps);
  return comps;
}

std::map<std::string, DominanceLevel> dominant_features(
    const ClusterComponent& component,
    const normalize::FeatureMatrix& features,
    std::span<const std::string> channels, const Thresholds& thresholds) {
  check_thresholds(thresholds);
  if (component.point_ids.empty())
    throw std::invalid_argument("component covers no points");
  std::map<std::string, DominanceLevel> out;
  for (const auto& channel : channels) {
    std::size_t c = features.col_index(channel);
    double sum = 0.0;
    for (std::size_t r : component.point_ids) sum += features.at(r, c);
    double m = sum / static_cast<double>(component.point_ids.size());
    DominanceLevel level = DominanceLevel::Absent;
    if (m >= thresholds.strong)
      level = DominanceLevel::StronglyDominant;
    else if (m >= thresholds.dominant)
      level = DominanceLevel::Dominant;
    out.emplace(channel, level);
  }
  return out;
}

EvolutionReport evolution_report(const std::map<int, PeriodSlice>& periods,
                                 std::size_t k,
                                 std::span<const std::string> channels,
                                 const Thresholds& thresholds) {
  check_thresholds(thresholds);
  if (k == 0) throw std::invalid_argument("k must be positive");
  EvolutionReport report;
  report.channels.assign(channels.begin(), channels.end());
  report.k = k;
  for (const auto& [period, slice] : periods) {
    auto comps = rank_components(*slice.graph, *slice.features);
    for (std::size_t i = 0; i < std::min(k, comps.size()); ++i) {
      EvolutionRow row;
      row.period = period;
      row.rank = comps[i].rank;
      row.nodes = comps[i].node_ids.size();
      row.points = comps[i].total_points;
      row.levels =
          dominant_features(comps[i], *slice.features, channels, thresholds);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

PopularityReport popularity_groups(const mapper::NerveGraph& graph,
                                   const normalize::FeatureMatrix& features,
                                   std::span<const std::string> channels,
                                   const Thresholds& thresholds,
                                   std::size_t k) {
  check_thresholds(thresholds);
  if (k == 0) throw std::invalid_argument("k must be positive");
  auto comps = rank_components(graph, features);
  if (comps.empty())
    throw std::invalid_argument("cannot group an empty graph");

  PopularityReport report;
  report.single_component = comps.size() == 1;

  std::size_t covered = 0;
  for (const auto& c : comps) covered += c.total_points;
  if (static_cast<double>(comps[0].total_points) >
      0.9 * static_cast<double>(covered)) {
    // One blob swallows nearly everything; regroup around its densest
    // regions instead of reporting a single row.
    report.density_fallback = true;
    std::vector<std::vector<std::size_t>> adjacency(graph.nodes.size());
    for (const auto& e : graph.edges) {
      adjacency[e.a].push_back(e.b);
      adjacency[e.b].push_back(e.a);
    }
    std::vector<std::size_t> seeds(graph.nodes.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i;
    std::sort(seeds.begin(), seeds.end(),
              [&](std::size_t a, std::size_t b) {
                if (graph.nodes[a].members.size() !=
                    graph.nodes[b].members.size())
                  return graph.nodes[a].members.size() >
                         graph.nodes[b].members.size();
                return a < b;
              });
    std::set<std::size_t> used;
    std::vector<ClusterComponent> groups;
    for (std::size_t seed : seeds) {
      if (groups.size() == k) break;
      if (used.contains(seed)) continue;
      std::vector<std::size_t> ids{seed};
      used.insert(seed);
      for (std::size_t nb : adjacency[seed])
        if (used.insert(nb).second) ids.push_back(nb);
      groups.push_back(make_component(std::move(ids), graph, features));
    }
    comps = std::move(groups);
    rank_in_place(comps);
  }

  std::size_t take = std::min(k, comps.size());
  std::vector<const ClusterComponent*> picked;
  for (std::size_t i = 0; i < take; ++i) picked.push_back(&comps[i]);

  auto popular = std::min_element(
      picked.begin(), picked.end(), [](const auto* a, const auto* b) {
        if (a->star_median != b->star_median)
          return a->star_median > b->star_median;
        return a->rank < b->rank;
      });
  std::vector<const ClusterComponent*> rest;
  for (auto* c : picked)
    if (c != *popular) rest.push_back(c);
  std::sort(rest.begin(), rest.end(), [](const auto* a, const auto* b) {
    if (a->star_median != b->star_median)
      return a->star_median > b->star_median;
    return a->rank < b->rank;
  });

  auto add_group = [&](const ClusterComponent* c, std::string label) {
    PopularityGroup g;
    g.label = std::move(label);
    g.component_rank = c->rank;
    g.points = c->total_points;
    g.star_median = c->star_median;
    g.levels = dominant_features(*c, features, channels, thresholds);
    report.groups.push_back(std::move(g));
  };
  add_group(*popular, "Popular");
  for (std::size_t i = 0; i < rest.size(); ++i)
    add_group(rest[i], "NonPopular" + std::to_string(i + 1));
  return report;
}

std::string render_evolution_text(const EvolutionReport& report) {
  std::string out = fmt::format("{:<8}{:<6}{:<7}{:<8}", "period", "rank",
                                "nodes", "points");
  std::vector<std::size_t> widths;
  for (const auto& ch : report.channels) {
    widths.push_back(std::max<std::size_t>(ch.size() + 2, 4));
    out += pad(ch, ch.size(), widths.back());
  }
  out += '\n';
  for (const auto& row : report.rows) {
    out += fmt::format("{:<8}{:<6}{:<7}{:<8}", row.period, row.rank, row.nodes,
                       row.points);
    for (std::size_t i = 0; i < report.channels.size(); ++i) {
      DominanceLevel level = row.levels.at(report.channels[i]);
      out += pad(mark(level), mark_width(level), widths[i]);
    }
    out += '\n';
  }
  return out;
}

std::string render_evolution_dsv(const EvolutionReport& report,
                                 char delimiter) {
  std::string out = fmt::format("period{0}rank{0}nodes{0}points", delimiter);
  for (const auto& ch : report.channels) out += fmt::format("{}{}", delimiter, ch);
  out += '\n';
  for (const auto& row : report.rows) {
    out += fmt::format("{1}{0}{2}{0}{3}{0}{4}", delimiter, row.period,
                       row.rank, row.nodes, row.points);
    for (const auto& ch : report.channels)
      out += fmt::format("{}{}", delimiter, to_string(row.levels.at(ch)));
    out += '\n';
  }
  return out;
}

std::string render_popularity_text(const PopularityReport& report,
                                   std::span<const std::string> channels,
                                   const std::string& title) {
  std::string out = title.empty() ? std::string{} : title + '\n';
  if (report.density_fallback)
    out += "note: one component dominates; groups are node neighborhoods\n";
  out += fmt::format("{:<14}{:<6}{:<8}{:<14}", "group", "rank", "points",
                     "star_median");
  std::vector<std::size_t> widths;
  for (const auto& ch : channels) {
    widths.push_back(std::max<std::size_t>(ch.size() + 2, 4));
    out += pad(ch, ch.size(), widths.back());
  }
  out += '\n';
  for (const auto& g : report.groups) {
    out += fmt::format("{:<14}{:<6}{:<8}{:<14.1f}", g.label, g.component_rank,
                       g.points, g.star_median);
    for (std::size_t i = 0; i < channels.size(); ++i) {
      DominanceLevel level = g.levels.at(channels[i]);
      out += pad(mark(level), mark_width(level), widths[i]);
    }
    out += '\n';
  }
  return out;
}

std::string render_popularity_dsv(const PopularityReport& report,
                                  std::span<const std::string> channels,
                                  char delimiter) {
  std::string out =
      fmt::format("group{0}rank{0}points{0}star_median", delimiter);
  for (const auto& ch : channels) out += fmt::format("{}{}", delimiter, ch);
  out += '\n';
  for (const auto& g : report.groups) {
    out += fmt::format("{1}{0}{2}{0}{3}{0}{4:.1f}", delimiter, g.label,
                       g.component_rank, g.points, g.star_median);
    for (const auto& ch : channels)
      out += fmt::format("{}{}", delimiter, to_string(g.levels.at(ch)));
    out += '\n';
  }
  return out;
}

std::string render_dominance_text(std::span<const ClusterComponent> comps,
                                  const normalize::FeatureMatrix& features,
                                  std::span<const std::string> channels,
                                  const Thresholds& thresholds) {
  std::string out = fmt::format("{:<6}{:<8}", "rank", "points");
  std::vector<std::size_t> widths;
  for (const auto& ch : channels) {
    widths.push_back(std::max<std::size_t>(ch.size() + 2, 4));
    out += pad(ch, ch.size(), widths.back());
  }
  out += '\n';
  for (const auto& c : comps) {
    auto levels = dominant_features(c, features, channels, thresholds);
    out += fmt::format("{:<6}{:<8}", c.rank, c.total_points);
    for (std::size_t i = 0; i < channels.size(); ++i) {
      DominanceLevel level = levels.at(channels[i]);
      out += pad(mark(level), mark_width(level), widths[i]);
    }
    out += '\n';
  }
  return out;
}

std::string render_dominance_dsv(std::span<const ClusterComponent> comps,
                                 const normalize::FeatureMatrix& features,
                                 std::span<const std::string> channels,
                                 const Thresholds& thresholds,
                                 char delimiter) {
  std::string out = fmt::format("rank{0}points", delimiter);
  for (const auto& ch : channels) out += fmt::format("{}{}", delimiter, ch);
  out += '\n';
  for (const auto& c : comps) {
    auto levels = dominant_features(c, features, channels, thresholds);
    out += fmt::format("{1}{0}{2}", delimiter, c.rank, c.total_points);
    for (const auto& ch : channels)
      out += fmt::format("{}{}", delimiter, to_string(levels.at(ch)));
    out += '\n';
  }
  return out;
}

std::string render_components_text(std::span<const ClusterComponent> comps) {
  std::string out = fmt::format("{:<6}{:<7}{:<8}{:<14}\n", "rank", "nodes",
                                "points", "star_median");
  for (const auto& c : comps)
    out += fmt::format("{:<6}{:<7}{:<8}{:<14.1f}\n", c.rank,
                       c.node_ids.size(), c.total_points, c.star_median);
  return out;
}

std::string render_components_dsv(std::span<const ClusterComponent> comps,
                                  char delimiter) {
  std::string out =
      fmt::format("rank{0}nodes{0}points{0}star_median\n", delimiter);
  for (const auto& c : comps)
    out += fmt::format("{1}{0}{2}{0}{3}{0}{4:.1f}\n", delimiter, c.rank,
                       c.node_ids.size(), c.total_points, c.star_median);
  return out;
}

}  // namespace chantop::analyze
