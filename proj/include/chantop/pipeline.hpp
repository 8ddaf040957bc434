#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chantop/embed.hpp"

namespace chantop::pipeline {

// Everything a run depends on; serialized verbatim into the manifest so a
// run can be replayed byte for byte.
struct Params {
  std::string input;
  std::string schema;
  std::string registry;  // empty = built-in channel set
  std::vector<std::string> channels;  // report subset; empty = default
  std::size_t top_n = 10000;
  std::optional<int> year;
  std::optional<std::string> ecosystem;
  std::vector<int> years;  // evolve periods; empty = discover from data

  embed::TsneParams tsne;

  int intervals = 10;
  double overlap = 0.5;
  int cover_dimension = 2;
  int histogram_bins = 10;
  bool cluster_in_embedding = false;
  std::size_t min_node_size = 1;

  double threshold_dominant = 0.5;
  double threshold_strong = 0.8;
  std::size_t group_count = 3;

  std::string color_channel = "Contributing Guidelines";
  std::string layout = "force";
  std::uint64_t render_seed = 1;
  std::size_t pca_components = 2;
  std::string kernels = "auto";

  std::string to_json_string() const;
  static Params from_json_string(const std::string& text);
  // Overlays values present in the JSON text onto *this.
  void apply_json_string(const std::string& text);
};

// Failures carry the pipeline stage they happened in.
struct StageError : std::runtime_error {
  std::string stage;
  StageError(std::string stage_name, const std::string& message)
      : std::runtime_error(stage_name + ": " + message),
        stage(std::move(stage_name)) {}
};

struct RunResult {
  std::filesystem::path run_dir;
  std::vector<std::filesystem::path> outputs;  // relative to run_dir
};

// out_dir empty: a fresh directory <utc-stamp>-<params-digest> under
// out_root. Every run writes a manifest.json recording the tool version,
// command, parameters, active kernels and SHA-256 digests of all inputs
// and outputs.
RunResult run_topology(const Params& params,
                       const std::filesystem::path& out_dir,
                       const std::filesystem::path& out_root = "runs");
RunResult run_evolve(const Params& params,
                     const std::filesystem::path& out_dir,
                     const std::filesystem::path& out_root = "runs");
RunResult run_compare(const Params& params,
                      const std::filesystem::path& out_dir,
                      const std::filesystem::path& out_root = "runs");
RunResult run_pca_baseline(const Params& params,
                           const std::filesystem::path& out_dir,
                           const std::filesystem::path& out_root = "runs");

// Reads command + params back from a manifest for replay.
struct ReplayInfo {
  std::string command;
  Params params;
};
ReplayInfo read_manifest(const std::filesystem::path& manifest_file);

std::string sha256_file(const std::filesystem::path& file);
std::string sha256_bytes(const std::string& bytes);

// Perplexity must stay below the point count; small slices shrink it.
double effective_perplexity(std::size_t n, double requested);

}  // namespace chantop::pipeline
