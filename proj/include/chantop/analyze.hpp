#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chantop/mapper.hpp"
#include "chantop/normalize.hpp"

namespace chantop::analyze {

enum class DominanceLevel { Absent, Dominant, StronglyDominant };

std::string to_string(DominanceLevel level);
std::string mark(DominanceLevel level);  // "-", "Y", "YY" rendered as glyphs

struct Thresholds {
  double dominant = 0.5;
  double strong = 0.8;
};

// Connected component of the nerve graph, ranked by how many distinct
// points it covers (rank 1 = most points; ties go to the component holding
// the smallest point index).
struct ClusterComponent {
  std::size_t rank = 0;  // 1-based
  std::vector<std::size_t> node_ids;
  std::vector<std::size_t> point_ids;  // distinct, ascending
  std::size_t total_points = 0;
  double star_median = 0.0;
};

std::vector<ClusterComponent> rank_components(
    const mapper::NerveGraph& graph,
    const normalize::FeatureMatrix& features);

// Mean normalized activity of each requested channel over the component's
// points, bucketed: >= strong is strongly dominant, >= dominant is dominant,
// anything else absent. Component must cover at least one point.
std::map<std::string, DominanceLevel> dominant_features(
    const ClusterComponent& component,
    const normalize::FeatureMatrix& features,
    std::span<const std::string> channels, const Thresholds& thresholds);

struct EvolutionRow {
  int period = 0;
  std::size_t rank = 0;
  std::size_t nodes = 0;
  std::size_t points = 0;
  std::map<std::string, DominanceLevel> levels;
};

// Dominance of the top k components per period; periods ascending, ranks
// ascending inside a period. Periods with fewer than k components simply
// contribute fewer rows.
struct EvolutionReport {
  std::vector<std::string> channels;
  std::size_t k = 0;
  std::vector<EvolutionRow> rows;
};

struct PeriodSlice {
  const mapper::NerveGraph* graph = nullptr;
  const normalize::FeatureMatrix* features = nullptr;
};

EvolutionReport evolution_report(const std::map<int, PeriodSlice>& periods,
                                 std::size_t k,
                                 std::span<const std::string> channels,
                                 const Thresholds& thresholds);

struct PopularityGroup {
  std::string label;  // "Popular", "NonPopular1", ...
  std::size_t component_rank = 0;
  std::size_t points = 0;
  double star_median = 0.0;
  std::map<std::string, DominanceLevel> levels;
};

struct PopularityReport {
  std::vector<PopularityGroup> groups;
  bool single_component = false;   // graph had one component; nothing to rank
  bool density_fallback = false;   // groups drawn from dense neighborhoods
};

// Takes the k largest components, calls the one with the highest star
// median "Popular" and orders the rest by star median. When one component
// swallows over 90% of the points the graph is regrouped around the k
// largest nodes and their direct neighbors, and the report is flagged.
PopularityReport popularity_groups(const mapper::NerveGraph& graph,
                                   const normalize::FeatureMatrix& features,
                                   std::span<const std::string> channels,
                                   const Thresholds& thresholds,
                                   std::size_t k = 3);

// Plain-text and delimiter-separated renderings shared by the reports.
std::string render_evolution_text(const EvolutionReport& report);
std::string render_evolution_dsv(const EvolutionReport& report,
                                 char delimiter = ',');
std::string render_popularity_text(const PopularityReport& report,
                                   std::span<const std::string> channels,
                                   const std::string& title);
std::string render_popularity_dsv(const PopularityReport& report,
                                  std::span<const std::string> channels,
                                  char delimiter = ',');
std::string render_components_text(std::span<const ClusterComponent> comps);
std::string render_components_dsv(std::span<const ClusterComponent> comps,
                                  char delimiter = ',');
std::string render_dominance_text(std::span<const ClusterComponent> comps,
                                  const normalize::FeatureMatrix& features,
                                  std::span<const std::string> channels,
                                  const Thresholds& thresholds);
std::string render_dominance_dsv(std::span<const ClusterComponent> comps,
                                 const normalize::FeatureMatrix& features,
                                 std::span<const std::string> channels,
                                 const Thresholds& thresholds,
                                 char delimiter = ',');

}  // namespace chantop::analyze
