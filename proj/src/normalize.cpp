#include "chantop/normalize.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace chantop::normalize {
namespace {

double normalized_value(const ingest::RawValue& v, knowledge::ValueKind kind,
                        std::int64_t count_max) {
  using Kind = ingest::RawValue::Kind;
  if (v.kind == Kind::Absent) return 0.0;
  switch (kind) {
    case knowledge::ValueKind::Count:
      if (count_max <= 0) return 0.0;
      return static_cast<double>(v.count) / static_cast<double>(count_max);
    case knowledge::ValueKind::Flag:
      return v.flag ? 1.0 : 0.0;
    case knowledge::ValueKind::Text:
      return v.text.empty() ? 0.0 : 1.0;
  }
  return 0.0;
}

}  // namespace

std::size_t FeatureMatrix::col_index(const std::string& channel) const {
  auto it = std::find(col_channels.begin(), col_channels.end(), channel);
  if (it == col_channels.end())
    throw std::out_of_range("channel not in matrix: " + channel);
  return static_cast<std::size_t>(it - col_channels.begin());
}

FeatureMatrix normalize_features(const ingest::ProjectTable& table,
                                 const knowledge::ChannelRegistry& registry,
                                 std::span<const std::string> channels) {
  std::set<std::string> wanted;
  for (const auto& name : channels) {
    if (registry.find(name) == nullptr)
      throw std::invalid_argument("unknown channel: " + name);
    wanted.insert(name);
  }

  FeatureMatrix m;
  std::vector<const knowledge::ChannelDescriptor*> cols;
  for (const auto& c : registry) {
    if (!wanted.contains(c.name)) continue;
    cols.push_back(&c);
    m.col_channels.push_back(c.name);
  }
  m.rows = table.records.size();
  m.cols = cols.size();
  m.values.assign(m.rows * m.cols, 0.0);

  for (const auto* c : cols) {
    if (c->value_kind != knowledge::ValueKind::Count) continue;
    for (auto& [eco, mx] : max_per_feature(table, registry, c->name))
      m.count_maxima.emplace(std::make_pair(c->name, eco), mx);
  }

  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto& rec = table.records[r];
    m.row_ids.push_back(rec.id);
    m.row_ecosystems.push_back(rec.ecosystem);
    m.row_stars.push_back(rec.stars);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto* c = cols[j];
      std::int64_t mx = 0;
      if (c->value_kind == knowledge::ValueKind::Count) {
        auto it = m.count_maxima.find({c->name, rec.ecosystem});
        if (it != m.count_maxima.end()) mx = it->second;
      }
      auto vit = rec.channel_values.find(c->name);
      const ingest::RawValue& raw = vit == rec.channel_values.end()
                                        ? ingest::RawValue::absent()
                                        : vit->second;
      m.values[r * m.cols + j] = normalized_value(raw, c->value_kind, mx);
    }
  }
  return m;
}

std::map<std::string, std::int64_t> max_per_feature(
    const ingest::ProjectTable& table,
    const knowledge::ChannelRegistry& registry, const std::string& channel) {
  const auto& desc = registry.at(channel);
  if (desc.value_kind != knowledge::ValueKind::Count)
    throw std::invalid_argument("channel '" + channel +
                                "' does not carry counts");
  std::map<std::string, std::int64_t> maxima;
  for (const auto& rec : table.records) {
    auto it = rec.channel_values.find(channel);
    if (it == rec.channel_values.end()) continue;
    auto& mx = maxima.try_emplace(rec.ecosystem, 0).first->second;
    if (it->second.kind == ingest::RawValue::Kind::Count)
      mx = std::max(mx, it->second.count);
  }
  return maxima;
}

void export_matrix(const FeatureMatrix& m, const std::filesystem::path& file,
                   char delimiter) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write matrix: " + file.string());
  std::vector<std::string> header{"id", "ecosystem", "stars"};
  header.insert(header.end(), m.col_channels.begin(), m.col_channels.end());
  ingest::write_delimited_row(out, header, delimiter);
  char buf[32];
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::vector<std::string> cells{m.row_ids[r], m.row_ecosystems[r],
                                   std::to_string(m.row_stars[r])};
    for (std::size_t c = 0; c < m.cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m.at(r, c));
      cells.emplace_back(buf);
    }
    ingest::write_delimited_row(out, cells, delimiter);
  }
}

}  // namespace chantop::normalize
