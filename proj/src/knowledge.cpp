#include "chantop/knowledge.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace chantop::knowledge {
namespace {

using nlohmann::json;

const std::set<KnowledgeCode> kSupportedCodes = {
    {KnowledgeForm::Tacit, 2},    {KnowledgeForm::Tacit, 3},
    {KnowledgeForm::Tacit, 4},    {KnowledgeForm::Explicit, 2},
    {KnowledgeForm::Explicit, 3}, {KnowledgeForm::Explicit, 4},
};

std::vector<KnowledgeCode> codes(std::initializer_list<const char*> names) {
  std::vector<KnowledgeCode> out;
  for (const char* n : names) out.push_back(parse_code(n));
  std::sort(out.begin(), out.end());
  return out;
}

ChannelDescriptor channel(std::string name,
                          std::initializer_list<const char*> code_names,
                          ValueKind kind, std::string rationale) {
  ChannelDescriptor d;
  d.name = std::move(name);
  d.codes = codes(code_names);
  d.dimension = derive_dimension(d.codes);
  d.value_kind = kind;
  d.rationale = std::move(rationale);
  return d;
}

ChannelRegistry build_default() {
  std::vector<ChannelDescriptor> c;
  c.push_back(channel(
      "GitHub Pages", {"T2", "T3"}, ValueKind::Flag,
      "Project site where maintainers narrate intent and working style, "
      "putting unwritten know-how into prose."));
  c.push_back(channel(
      "Readme", {"T3", "T4"}, ValueKind::Flag,
      "First document newcomers read; captures the maintainers' mental "
      "model of what the project is for."));
  c.push_back(channel(
      "Security Audit", {"T2", "E3"}, ValueKind::Text,
      "Audit notes turn reviewers' security judgment into a document others "
      "can act on."));
  c.push_back(channel(
      "Wiki", {"T2", "T3"}, ValueKind::Flag,
      "Free-form space where contributors write down practices that "
      "otherwise live in people's heads."));
  c.push_back(channel(
      "Changelog", {"E2", "E3"}, ValueKind::Text,
      "Aggregates commit-level history into release notes; reshapes "
      "existing written records."));
  c.push_back(channel(
      "Code of Conduct", {"E2", "E3"}, ValueKind::Text,
      "Community rules assembled from established templates and policies."));
  c.push_back(channel(
      "Contributing Guidelines", {"E2", "E3", "E4"}, ValueKind::Text,
      "Codifies the workflow for patches by combining conventions already "
      "written elsewhere in the project."));
  c.push_back(channel(
      "Fork", {"E2", "E3", "E4"}, ValueKind::Flag,
      "A fork replicates the full recorded state of a repository for "
      "derived work."));
  c.push_back(channel(
      "Issue Tracker", {"E2", "E4"}, ValueKind::Flag,
      "Structured reports cross-reference code, commits and other issues."));
  c.push_back(channel(
      "License", {"E2", "E3"}, ValueKind::Text,
      "Standard legal text selected and attached from a shared catalog."));
  c.push_back(channel(
      "Security Threat Model", {"E2", "E3", "E4"}, ValueKind::Flag,
      "Systematic enumeration of attack surfaces built from documented "
      "architecture."));
  c.push_back(channel(
      "# of Forks", {"E2", "E4"}, ValueKind::Count,
      "Volume of recorded replications; a tally over explicit artifacts."));
  c.push_back(channel(
      "# of Open Issues", {"E2", "E4"}, ValueKind::Count,
      "Volume of open structured reports; a tally over explicit artifacts."));
  return ChannelRegistry(std::move(c));
}

json to_json(const ChannelDescriptor& d) {
  json codes_json = json::array();
  for (const auto& c : d.codes) codes_json.push_back(to_string(c));
  return json{{"name", d.name},
              {"codes", codes_json},
              {"dimension", to_string(d.dimension)},
              {"value_kind", to_string(d.value_kind)},
              {"rationale", d.rationale}};
}

ChannelDescriptor descriptor_from_json(const json& j) {
  ChannelDescriptor d;
  d.name = j.at("name").get<std::string>();
  for (const auto& c : j.at("codes")) d.codes.push_back(parse_code(c.get<std::string>()));
  std::sort(d.codes.begin(), d.codes.end());
  d.codes.erase(std::unique(d.codes.begin(), d.codes.end()), d.codes.end());
  d.dimension = derive_dimension(d.codes);
  if (j.contains("dimension") &&
      j.at("dimension").get<std::string>() != to_string(d.dimension))
    throw std::invalid_argument("channel '" + d.name +
                                "': dimension does not match codes");
  d.value_kind = parse_value_kind(j.at("value_kind").get<std::string>());
  d.rationale = j.value("rationale", std::string{});
  return d;
}

}  // namespace

KnowledgeCode parse_code(std::string_view text) {
  if (text.size() < 2 || (text[0] != 'T' && text[0] != 'E'))
    throw std::invalid_argument("bad knowledge code: " + std::string(text));
  int idx = 0;
  for (char ch : text.substr(1)) {
    if (ch < '0' || ch > '9')
      throw std::invalid_argument("bad knowledge code: " + std::string(text));
    idx = idx * 10 + (ch - '0');
  }
  if (idx <= 0)
    throw std::invalid_argument("bad knowledge code: " + std::string(text));
  return {text[0] == 'T' ? KnowledgeForm::Tacit : KnowledgeForm::Explicit,
          idx};
}

std::string to_string(KnowledgeCode code) {
  return (code.form == KnowledgeForm::Tacit ? "T" : "E") +
         std::to_string(code.index);
}

std::string to_string(SeciDimension dim) {
  switch (dim) {
    case SeciDimension::Socialization: return "Socialization";
    case SeciDimension::Externalization: return "Externalization";
    case SeciDimension::Combination: return "Combination";
    case SeciDimension::Internalization: return "Internalization";
  }
  return "?";
}

std::string to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Count: return "count";
    case ValueKind::Flag: return "flag";
    case ValueKind::Text: return "text";
  }
  return "?";
}

ValueKind parse_value_kind(std::string_view text) {
  if (text == "count") return ValueKind::Count;
  if (text == "flag") return ValueKind::Flag;
  if (text == "text") return ValueKind::Text;
  throw std::invalid_argument("bad value kind: " + std::string(text));
}

SeciDimension derive_dimension(std::span<const KnowledgeCode> codes) {
  if (codes.empty())
    throw std::invalid_argument("cannot derive dimension from no codes");
  for (const auto& c : codes)
    if (c.form == KnowledgeForm::Tacit) return SeciDimension::Externalization;
  return SeciDimension::Combination;
}

ChannelRegistry::ChannelRegistry(std::vector<ChannelDescriptor> channels)
    : channels_(std::move(channels)) {}

const ChannelDescriptor* ChannelRegistry::find(std::string_view name) const {
  for (const auto& c : channels_)
    if (c.name == name) return &c;
  return nullptr;
}

const ChannelDescriptor& ChannelRegistry::at(std::string_view name) const {
  const ChannelDescriptor* d = find(name);
  if (d == nullptr)
    throw std::out_of_range("unknown channel: " + std::string(name));
  return *d;
}

std::size_t ChannelRegistry::count_dimension(SeciDimension dim) const {
  return static_cast<std::size_t>(
      std::count_if(channels_.begin(), channels_.end(),
                    [dim](const auto& c) { return c.dimension == dim; }));
}

const ChannelRegistry& default_registry() {
  static const ChannelRegistry reg = build_default();
  return reg;
}

const std::vector<std::string>& default_analysis_channels() {
  static const std::vector<std::string> names{
      "GitHub Pages", "Security Audit",          "Wiki",
      "Changelog",    "Contributing Guidelines", "Fork",
      "Issue Tracker", "License",
  };
  return names;
}

std::vector<std::string> validate_registry(const ChannelRegistry& registry) {
  std::vector<std::string> problems;
  if (registry.size() == 0) problems.push_back("registry is empty");
  std::set<std::string> seen;
  for (const auto& c : registry) {
    if (c.name.empty()) problems.push_back("channel with empty name");
    if (!seen.insert(c.name).second)
      problems.push_back("duplicate channel name: " + c.name);
    if (c.codes.empty()) {
      problems.push_back("channel '" + c.name + "' has no codes");
      continue;
    }
    if (!std::is_sorted(c.codes.begin(), c.codes.end()))
      problems.push_back("channel '" + c.name + "' codes not sorted");
    if (std::adjacent_find(c.codes.begin(), c.codes.end()) != c.codes.end())
      problems.push_back("channel '" + c.name + "' has duplicate codes");
    for (const auto& code : c.codes)
      if (!kSupportedCodes.contains(code))
        problems.push_back("channel '" + c.name + "' uses unsupported code " +
                           to_string(code));
    if (c.dimension != derive_dimension(c.codes))
      problems.push_back("channel '" + c.name +
                         "' dimension does not match its codes");
  }
  return problems;
}

ChannelRegistry load_registry(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open registry file: " + file.string());
  json j = json::parse(in);
  std::vector<ChannelDescriptor> channels;
  for (const auto& item : j.at("channels"))
    channels.push_back(descriptor_from_json(item));
  ChannelRegistry reg(std::move(channels));
  auto problems = validate_registry(reg);
  if (!problems.empty()) {
    std::string msg = "invalid registry " + file.string() + ":";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::runtime_error(msg);
  }
  return reg;
}

void save_registry(const ChannelRegistry& registry,
                   const std::filesystem::path& file) {
  json channels_json = json::array();
  for (const auto& c : registry) channels_json.push_back(to_json(c));
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write registry file: " + file.string());
  out << json{{"channels", channels_json}}.dump(2) << '\n';
}

}  // namespace chantop::knowledge
