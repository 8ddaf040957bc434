#include "chantop/svg_render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "chantop/rng.hpp"

namespace chantop::render {
namespace {

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
  return c <= 0.0031308 ? c * 12.92
                        : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Fruchterman-Reingold on the unit square; deterministic for a fixed seed.
std::vector<Point> force_layout(const mapper::NerveGraph& graph,
                                std::uint64_t seed) {
  const std::size_t n = graph.nodes.size();
  std::vector<Point> pos(n);
  Rng rng(seed);
  for (auto& p : pos) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  if (n < 2) return pos;
  const double k = std::sqrt(1.0 / static_cast<double>(n));
  const int rounds = 100;
  std::vector<Point> disp(n);
  for (int round = 0; round < rounds; ++round) {
    double temp = 0.1 * (1.0 - static_cast<double>(round) / rounds) + 1e-3;
    for (auto& d : disp) d = {0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double dx = pos[i].x - pos[j].x;
        double dy = pos[i].y - pos[j].y;
        double dist = std::sqrt(dx * dx + dy * dy) + 1e-9;
        double f = k * k / dist / dist;
        disp[i].x += dx * f;
        disp[i].y += dy * f;
        disp[j].x -= dx * f;
        disp[j].y -= dy * f;
      }
    for (const auto& e : graph.edges) {
      double dx = pos[e.a].x - pos[e.b].x;
      double dy = pos[e.a].y - pos[e.b].y;
      double dist = std::sqrt(dx * dx + dy * dy) + 1e-9;
      double f = dist / k;
      disp[e.a].x -= dx / dist * f * k;
      disp[e.a].y -= dy / dist * f * k;
      disp[e.b].x += dx / dist * f * k;
      disp[e.b].y += dy / dist * f * k;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double len = std::sqrt(disp[i].x * disp[i].x + disp[i].y * disp[i].y);
      if (len > 0.0) {
        double step = std::min(len, temp);
        pos[i].x += disp[i].x / len * step;
        pos[i].y += disp[i].y / len * step;
      }
    }
  }
  return pos;
}

std::vector<Point> grid_layout(const mapper::NerveGraph& graph,
                               const mapper::Cover& cover) {
  std::vector<Point> pos(graph.nodes.size());
  std::map<std::size_t, std::size_t> seen_in_bin;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& node = graph.nodes[i];
    const auto& bin = cover.bins.at(node.bin);
    std::size_t slot = seen_in_bin[node.bin]++;
    pos[i].x = (bin.lo[0] + bin.hi[0]) / 2.0;
    pos[i].y = (bin.lo[1] + bin.hi[1]) / 2.0 +
               static_cast<double>(slot) * (bin.hi[1] - bin.lo[1]) * 0.12;
  }
  return pos;
}

}  // namespace

Layout parse_layout(std::string_view name) {
  if (name == "force") return Layout::ForceDirected;
  if (name == "grid") return Layout::BinGrid;
  throw std::invalid_argument("unknown layout: " + std::string(name));
}

std::string to_string(Layout layout) {
  return layout == Layout::ForceDirected ? "force" : "grid";
}

std::string ramp_color(const RenderSpec& spec, double t) {
  t = std::clamp(t, 0.0, 1.0);
  int rgb[3];
  for (int c = 0; c < 3; ++c) {
    double lo = srgb_to_linear(spec.color_lo[c] / 255.0);
    double hi = srgb_to_linear(spec.color_hi[c] / 255.0);
    double v = linear_to_srgb(lo + (hi - lo) * t);
    rgb[c] = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  }
  return fmt::format("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2]);
}

void render_svg(const mapper::NerveGraph& graph, const mapper::Cover* cover,
                const RenderSpec& spec, const std::filesystem::path& file) {
  if (spec.layout == Layout::BinGrid && cover == nullptr)
    throw std::invalid_argument("grid layout needs the cover");

  std::vector<Point> pos = spec.layout == Layout::ForceDirected
                               ? force_layout(graph, spec.seed)
                               : grid_layout(graph, *cover);

  const double size = 1000.0;
  const double margin = 70.0;
  double lo_x = std::numeric_limits<double>::infinity();
  double hi_x = -lo_x;
  double lo_y = lo_x;
  double hi_y = -lo_x;
  for (const auto& p : pos) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  auto map_x = [&](double x) {
    double range = hi_x - lo_x;
    if (range == 0.0) return size / 2.0;
    return margin + (x - lo_x) / range * (size - 2.0 * margin);
  };
  auto map_y = [&](double y) {
    double range = hi_y - lo_y;
    if (range == 0.0) return size / 2.0;
    // Flip so larger filter values appear higher.
    return size - margin - (y - lo_y) / range * (size - 2.0 * margin);
  };

  std::size_t largest = 1;
  for (const auto& node : graph.nodes)
    largest = std::max(largest, node.members.size());
  auto radius = [&](std::size_t members) {
    double base = 6.0 + 24.0 * std::sqrt(static_cast<double>(members) /
                                         static_cast<double>(largest));
    return base * spec.node_scale;
  };

  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write svg: " + file.string());
  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {0} {0}\">\n",
      size);
  out << fmt::format(
      "  <desc>channel activity map; color: {} (red = none, blue = full), "
      "circle area tracks cluster size; layout {} seed {}</desc>\n",
      spec.color_channel, to_string(spec.layout), spec.seed);
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (const auto& e : graph.edges)
    out << fmt::format(
        "  <line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
        "stroke=\"#bbbbbb\" stroke-width=\"1.5\"/>\n",
        map_x(pos[e.a].x), map_y(pos[e.a].y), map_x(pos[e.b].x),
        map_y(pos[e.b].y));
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& node = graph.nodes[i];
    double t = 0.0;
    if (!spec.color_channel.empty()) {
      auto it = node.feature_means.find(spec.color_channel);
      if (it == node.feature_means.end())
        throw std::invalid_argument("channel not in graph features: " +
                                    spec.color_channel);
      t = it->second;
    }
    out << fmt::format(
        "  <circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\" "
        "stroke=\"#333333\" stroke-width=\"0.8\">\n",
        map_x(pos[i].x), map_y(pos[i].y), radius(node.members.size()),
        ramp_color(spec, t));
    out << fmt::format("    <title>node {} | {} points | {:.3f}</title>\n",
                       node.id, node.members.size(), t);
    out << "  </circle>\n";
  }

  // Legend: discrete ramp swatches plus endpoint labels.
  const int swatches = 32;
  const double legend_w = 300.0;
  const double legend_x = size - margin - legend_w;
  const double legend_y = size - 40.0;
  for (int s = 0; s < swatches; ++s) {
    double t = static_cast<double>(s) / (swatches - 1);
    out << fmt::format(
        "  <rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"14\" "
        "fill=\"{}\"/>\n",
        legend_x + s * legend_w / swatches, legend_y, legend_w / swatches + 0.5,
        ramp_color(spec, t));
  }
  out << fmt::format(
      "  <text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"16\" "
      "font-family=\"sans-serif\">{}</text>\n",
      legend_x, legend_y - 8.0,
      spec.color_channel.empty() ? std::string("(uncolored)")
                                 : spec.color_channel);
  out << fmt::format(
      "  <text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"14\" "
      "font-family=\"sans-serif\">0</text>\n",
      legend_x - 14.0, legend_y + 12.0);
  out << fmt::format(
      "  <text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"14\" "
      "font-family=\"sans-serif\">1</text>\n",
      legend_x + legend_w + 5.0, legend_y + 12.0);
  out << "</svg>\n";
}

}  // namespace chantop::render
