#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chantop/ingest.hpp"
#include "chantop/knowledge.hpp"

namespace chantop::normalize {

// Dense row-major matrix of per-project channel activity in [0, 1].
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;              // rows * cols
  std::vector<std::string> row_ids;        // project ids, table order
  std::vector<std::string> row_ecosystems;
  std::vector<std::int64_t> row_stars;
  std::vector<std::string> col_channels;   // registry order
  // Per (channel, ecosystem) maximum used for count scaling.
  std::map<std::pair<std::string, std::string>, std::int64_t> count_maxima;

  double at(std::size_t r, std::size_t c) const {
    return values[r * cols + c];
  }
  const double* row(std::size_t r) const { return values.data() + r * cols; }
  std::size_t col_index(const std::string& channel) const;  // throws
};

// Count channels scale by the per-ecosystem maximum (flat zero when the
// maximum is zero), flags map to 1/0, text presence to 1/0, absent to 0.
// Channel subset must name registered channels; output column order follows
// the registry, not the subset order.
FeatureMatrix normalize_features(const ingest::ProjectTable& table,
                                 const knowledge::ChannelRegistry& registry,
                                 std::span<const std::string> channels);

// Maxima of a count channel grouped by ecosystem; empty groups are omitted,
// channels without any present value report zero for seen ecosystems.
std::map<std::string, std::int64_t> max_per_feature(
    const ingest::ProjectTable& table,
    const knowledge::ChannelRegistry& registry, const std::string& channel);

void export_matrix(const FeatureMatrix& m, const std::filesystem::path& file,
                   char delimiter = ',');

}  // namespace chantop::normalize
