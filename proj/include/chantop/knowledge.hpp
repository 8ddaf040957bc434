#pragma once

#include <compare>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chantop::knowledge {

enum class KnowledgeForm { Tacit, Explicit };

// A short code such as "T2" or "E4" naming one kind of knowledge content a
// channel can carry. Only indices 2..4 appear in the shipped registry.
struct KnowledgeCode {
  KnowledgeForm form;
  int index;

  auto operator<=>(const KnowledgeCode&) const = default;
};

KnowledgeCode parse_code(std::string_view text);  // throws std::invalid_argument
std::string to_string(KnowledgeCode code);

enum class SeciDimension {
  Socialization,
  Externalization,
  Combination,
  Internalization
};

std::string to_string(SeciDimension dim);

// How a channel shows up in a raw export cell.
enum class ValueKind { Count, Flag, Text };

std::string to_string(ValueKind kind);
ValueKind parse_value_kind(std::string_view text);

struct ChannelDescriptor {
  std::string name;
  std::vector<KnowledgeCode> codes;  // sorted, duplicate-free
  SeciDimension dimension;
  ValueKind value_kind;
  std::string rationale;

  bool operator==(const ChannelDescriptor&) const = default;
};

// A channel that moves any tacit content is an externalizing channel; one
// that only recombines already-written knowledge is a combining channel.
SeciDimension derive_dimension(std::span<const KnowledgeCode> codes);

class ChannelRegistry {
 public:
  ChannelRegistry() = default;
  explicit ChannelRegistry(std::vector<ChannelDescriptor> channels);

  const ChannelDescriptor* find(std::string_view name) const;
  const ChannelDescriptor& at(std::string_view name) const;  // throws
  std::size_t size() const { return channels_.size(); }
  std::size_t count_dimension(SeciDimension dim) const;

  auto begin() const { return channels_.begin(); }
  auto end() const { return channels_.end(); }
  const std::vector<ChannelDescriptor>& channels() const { return channels_; }

  bool operator==(const ChannelRegistry&) const = default;

 private:
  std::vector<ChannelDescriptor> channels_;
};

// The thirteen channels observable in libraries.io-style exports.
const ChannelRegistry& default_registry();

// Channel subset used for reports and coloring unless overridden.
const std::vector<std::string>& default_analysis_channels();

// Structural checks: unique non-empty names, non-empty sorted code sets drawn
// from the supported code alphabet, and a dimension that matches the codes.
// Returns human-readable violations; empty means the registry is sound.
std::vector<std::string> validate_registry(const ChannelRegistry& registry);

// JSON round-trip for user-supplied registries. load throws on parse errors
// or when validate_registry reports violations.
ChannelRegistry load_registry(const std::filesystem::path& file);
void save_registry(const ChannelRegistry& registry,
                   const std::filesystem::path& file);

}  // namespace chantop::knowledge
