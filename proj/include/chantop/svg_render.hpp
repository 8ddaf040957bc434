#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "chantop/mapper.hpp"

namespace chantop::render {

enum class Layout { ForceDirected, BinGrid };

Layout parse_layout(std::string_view name);  // "force" or "grid"
std::string to_string(Layout layout);

struct RenderSpec {
  std::string color_channel;
  Layout layout = Layout::ForceDirected;
  double node_scale = 1.0;
  std::uint64_t seed = 1;
  // Endpoints of the color ramp; values run gamma-correct from lo at 0
  // (no activity, red) to hi at 1 (full activity, blue).
  std::array<std::uint8_t, 3> color_lo{255, 0, 0};
  std::array<std::uint8_t, 3> color_hi{0, 0, 255};
};

// sRGB-aware interpolation between the ramp endpoints at t in [0, 1]
// (values outside are clamped). Returns "#rrggbb".
std::string ramp_color(const RenderSpec& spec, double t);

// Self-contained SVG: edges, one circle per node with area proportional to
// member count, a legend for the active channel and a short description of
// the encoding. The grid layout needs the cover the graph was built from.
void render_svg(const mapper::NerveGraph& graph, const mapper::Cover* cover,
                const RenderSpec& spec, const std::filesystem::path& file);

}  // namespace chantop::render
