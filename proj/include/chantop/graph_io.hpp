#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "chantop/mapper.hpp"

namespace chantop::graphio {

enum class GraphFormat { GraphML, Dot, Json };

GraphFormat parse_graph_format(std::string_view name);  // throws
std::string to_string(GraphFormat format);

// Nodes carry size, bin, star_median and one numeric color attribute per
// requested channel; edges carry the shared point count. The JSON format
// keeps full member lists and reads back losslessly.
void export_graph(const mapper::NerveGraph& graph, GraphFormat format,
                  std::span<const std::string> color_channels,
                  const std::filesystem::path& file);

mapper::NerveGraph read_graph_json(const std::filesystem::path& file);

}  // namespace chantop::graphio
