#include "chantop/graph_io.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace chantop::graphio {
namespace {

using nlohmann::json;

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string identifier(const std::string& s) {
  std::string out;
  for (char c : s)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

void write_graphml(const mapper::NerveGraph& graph,
                   std::span<const std::string> color_channels,
                   std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"d0\" for=\"node\" attr.name=\"size\" attr.type=\"long\"/>\n"
      << "  <key id=\"d1\" for=\"node\" attr.name=\"bin\" attr.type=\"long\"/>\n"
      << "  <key id=\"d2\" for=\"node\" attr.name=\"star_median\" attr.type=\"double\"/>\n"
      << "  <key id=\"d3\" for=\"edge\" attr.name=\"shared\" attr.type=\"long\"/>\n";
  for (std::size_t i = 0; i < color_channels.size(); ++i)
    out << "  <key id=\"c" << i << "\" for=\"node\" attr.name=\"mean_"
        << xml_escape(color_channels[i]) << "\" attr.type=\"double\"/>\n";
  out << "  <graph id=\"nerve\" edgedefault=\"undirected\">\n";
  for (const auto& node : graph.nodes) {
    out << "    <node id=\"n" << node.id << "\">\n"
        << "      <data key=\"d0\">" << node.members.size() << "</data>\n"
        << "      <data key=\"d1\">" << node.bin << "</data>\n"
        << "      <data key=\"d2\">" << num(node.star_median) << "</data>\n";
    for (std::size_t i = 0; i < color_channels.size(); ++i)
      out << "      <data key=\"c" << i << "\">"
          << num(node.feature_means.at(color_channels[i])) << "</data>\n";
    out << "    </node>\n";
  }
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    out << "    <edge id=\"e" << e << "\" source=\"n" << edge.a
        << "\" target=\"n" << edge.b << "\">\n"
        << "      <data key=\"d3\">" << edge.shared << "</data>\n"
        << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

void write_dot(const mapper::NerveGraph& graph,
               std::span<const std::string> color_channels,
               std::ostream& out) {
  out << "graph nerve {\n  node [shape=circle];\n";
  for (const auto& node : graph.nodes) {
    out << "  n" << node.id << " [size=" << node.members.size()
        << ", bin=" << node.bin << ", star_median=" << num(node.star_median);
    for (const auto& ch : color_channels)
      out << ", mean_" << identifier(ch) << '='
          << num(node.feature_means.at(ch));
    out << "];\n";
  }
  for (const auto& edge : graph.edges)
    out << "  n" << edge.a << " -- n" << edge.b << " [shared=" << edge.shared
        << "];\n";
  out << "}\n";
}

void write_json_graph(const mapper::NerveGraph& graph, std::ostream& out) {
  json nodes = json::array();
  for (const auto& node : graph.nodes) {
    json means = json::object();
    for (const auto& [ch, v] : node.feature_means) means[ch] = v;
    nodes.push_back(json{{"id", node.id},
                         {"bin", node.bin},
                         {"members", node.members},
                         {"feature_means", means},
                         {"star_median", node.star_median}});
  }
  json edges = json::array();
  for (const auto& edge : graph.edges)
    edges.push_back(json{{"a", edge.a}, {"b", edge.b}, {"shared", edge.shared}});
  out << json{{"nodes", nodes}, {"edges", edges}}.dump(2) << '\n';
}

}  // namespace

GraphFormat parse_graph_format(std::string_view name) {
  if (name == "graphml") return GraphFormat::GraphML;
  if (name == "dot") return GraphFormat::Dot;
  if (name == "json") return GraphFormat::Json;
  throw std::invalid_argument("unknown graph format: " + std::string(name));
}

std::string to_string(GraphFormat format) {
  switch (format) {
    case GraphFormat::GraphML: return "graphml";
    case GraphFormat::Dot: return "dot";
    case GraphFormat::Json: return "json";
  }
  return "?";
}

void export_graph(const mapper::NerveGraph& graph, GraphFormat format,
                  std::span<const std::string> color_channels,
                  const std::filesystem::path& file) {
  for (const auto& ch : color_channels)
    for (const auto& node : graph.nodes)
      if (!node.feature_means.contains(ch))
        throw std::invalid_argument("channel not in graph features: " + ch);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write graph file: " + file.string());
  switch (format) {
    case GraphFormat::GraphML: write_graphml(graph, color_channels, out); break;
    case GraphFormat::Dot: write_dot(graph, color_channels, out); break;
    case GraphFormat::Json: write_json_graph(graph, out); break;
  }
}

mapper::NerveGraph read_graph_json(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open graph file: " + file.string());
  json j = json::parse(in);
  mapper::NerveGraph graph;
  for (const auto& n : j.at("nodes")) {
    mapper::ClusterNode node;
    node.id = n.at("id").get<std::size_t>();
    node.bin = n.at("bin").get<std::size_t>();
    node.members = n.at("members").get<std::vector<std::size_t>>();
    for (const auto& [ch, v] : n.at("feature_means").items())
      node.feature_means[ch] = v.get<double>();
    node.star_median = n.at("star_median").get<double>();
    graph.nodes.push_back(std::move(node));
  }
  for (const auto& e : j.at("edges"))
    graph.edges.push_back({e.at("a").get<std::size_t>(),
                           e.at("b").get<std::size_t>(),
                           e.at("shared").get<std::size_t>()});
  return graph;
}

}  // namespace chantop::graphio
