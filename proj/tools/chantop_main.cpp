#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "chantop/fixture.hpp"
#include "chantop/kernels.hpp"
#include "chantop/knowledge.hpp"
#include "chantop/pipeline.hpp"
#include "chantop/version.hpp"

namespace {

using chantop::pipeline::Params;

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// --config and --manifest must take effect before the regular flags are
// bound, so they are fished out of argv ahead of the real parse.
std::string find_arg(int argc, char** argv, const std::string& name) {
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == name && i + 1 < argc) return argv[i + 1];
    if (a.rfind(name + "=", 0) == 0) return a.substr(name.size() + 1);
  }
  return {};
}

struct CommonOpts {
  std::string out_dir;
  std::string out_root = "runs";
  std::string manifest;
  std::string config;
};

void add_pipeline_options(CLI::App* cmd, Params& p, CommonOpts& opts) {
  cmd->add_option("--input", p.input, "project export (CSV)");
  cmd->add_option("--schema", p.schema, "column mapping file");
  cmd->add_option("--registry", p.registry, "channel registry JSON override");
  cmd->add_option("--channel", p.channels,
                  "report channel (repeatable; default: built-in subset)");
  cmd->add_option("--top-n", p.top_n, "keep the n most starred projects");
  cmd->add_option("--year", p.year, "only projects created in this year");
  cmd->add_option("--ecosystem", p.ecosystem, "only this ecosystem");
  cmd->add_option("--perplexity", p.tsne.perplexity, "embedding perplexity");
  cmd->add_option("--iterations", p.tsne.iterations, "optimizer iterations");
  cmd->add_option("--learning-rate", p.tsne.learning_rate, "optimizer step");
  cmd->add_option("--exaggeration", p.tsne.exaggeration,
                  "early attraction factor");
  cmd->add_option("--exaggeration-iters", p.tsne.exaggeration_iters,
                  "iterations under early exaggeration");
  cmd->add_option("--seed", p.tsne.seed, "embedding seed");
  cmd->add_option("--intervals", p.intervals, "cover windows per axis");
  cmd->add_option("--overlap", p.overlap, "cover window overlap [0,1)");
  cmd->add_option("--cover-dim", p.cover_dimension, "cover dimension (1 or 2)");
  cmd->add_option("--histogram-bins", p.histogram_bins,
                  "bins for the cluster cut heuristic");
  cmd->add_flag("--cluster-in-embedding", p.cluster_in_embedding,
                "cluster in embedding space instead of feature space");
  cmd->add_option("--min-node-size", p.min_node_size,
                  "drop clusters smaller than this");
  cmd->add_option("--theta-dominant", p.threshold_dominant,
                  "mean activity for a dominant channel");
  cmd->add_option("--theta-strong", p.threshold_strong,
                  "mean activity for a strongly dominant channel");
  cmd->add_option("--groups", p.group_count, "components per report");
  cmd->add_option("--color-channel", p.color_channel, "channel drawn in color");
  cmd->add_option("--layout", p.layout, "svg layout: force or grid");
  cmd->add_option("--render-seed", p.render_seed, "layout seed");
  cmd->add_option("--pca-components", p.pca_components,
                  "components for the linear baseline");
  cmd->add_option("--kernels", p.kernels,
                  "numeric kernels: auto, scalar or avx2");
  cmd->add_option("--out", opts.out_dir, "run directory (default: generated)");
  cmd->add_option("--out-root", opts.out_root,
                  "parent for generated run directories");
  cmd->add_option("--manifest", opts.manifest,
                  "replay parameters from an earlier run's manifest");
  cmd->add_option("--config", opts.config,
                  "JSON defaults (or set CHANTOP_CONFIG)");
}

}  // namespace

int main(int argc, char** argv) {
  Params params;
  try {
    std::string config = find_arg(argc, argv, "--config");
    if (config.empty())
      if (const char* env = std::getenv("CHANTOP_CONFIG");
          env != nullptr && *env != '\0')
        config = env;
    if (!config.empty()) params.apply_json_string(slurp(config));
    std::string manifest = find_arg(argc, argv, "--manifest");
    if (!manifest.empty())
      params = chantop::pipeline::read_manifest(manifest).params;
  } catch (const std::exception& e) {
    std::cerr << "chantop: " << e.what() << '\n';
    return 1;
  }

  CLI::App app{"topology of communication channels in software ecosystems"};
  app.set_version_flag("--version",
                       fmt::format("{} {}", chantop::kToolName,
                                   chantop::kToolVersion));
  app.require_subcommand(1);
  CommonOpts opts;

  auto* topology = app.add_subcommand(
      "topology", "embed one export and build the channel activity graph");
  add_pipeline_options(topology, params, opts);
  auto* evolve = app.add_subcommand(
      "evolve", "track leading clusters across creation years");
  add_pipeline_options(evolve, params, opts);
  evolve
      ->add_option("--years", params.years,
                   "periods to compare (default: discovered)")
      ->delimiter(',');
  auto* compare = app.add_subcommand(
      "compare", "popularity groups per ecosystem");
  add_pipeline_options(compare, params, opts);
  auto* baseline = app.add_subcommand(
      "pca-baseline", "linear projection of the same features");
  add_pipeline_options(baseline, params, opts);

  auto* gen = app.add_subcommand("gen-fixture", "write a synthetic export");
  std::string preset_name = "uniform";
  std::size_t gen_n = 0;
  std::uint64_t gen_seed = 7;
  std::string gen_out = "fixture.csv";
  std::string gen_schema_out;
  gen->add_option("--preset", preset_name,
                  "one of: blobs3, decline, popularity, uniform, sample");
  gen->add_option("--n", gen_n, "row count (0 = preset default)");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "CSV file to write");
  gen->add_option("--write-schema", gen_schema_out,
                  "also write the matching schema file here");

  auto* validate = app.add_subcommand(
      "validate-registry", "check a channel registry for contradictions");
  std::string validate_file;
  validate->add_option("--registry", validate_file,
                       "registry JSON (default: built-in)");
  std::string validate_write;
  validate->add_option("--write", validate_write,
                       "write the validated registry to this JSON file");

  CLI11_PARSE(app, argc, argv);

  try {
    using namespace chantop::pipeline;
    RunResult result;
    if (topology->parsed()) {
      result = run_topology(params, opts.out_dir, opts.out_root);
    } else if (evolve->parsed()) {
      result = run_evolve(params, opts.out_dir, opts.out_root);
    } else if (compare->parsed()) {
      result = run_compare(params, opts.out_dir, opts.out_root);
    } else if (baseline->parsed()) {
      result = run_pca_baseline(params, opts.out_dir, opts.out_root);
    } else if (gen->parsed()) {
      static const std::map<std::string, std::size_t> default_n{
          {"blobs3", 2000},
          {"decline", 2100},
          {"popularity", 1500},
          {"uniform", 1000},
          {"sample", 500}};
      std::size_t n = gen_n;
      if (n == 0) {
        auto it = default_n.find(preset_name);
        n = it == default_n.end() ? 1000 : it->second;
      }
      auto spec = chantop::fixture::preset(preset_name, gen_seed, n);
      chantop::fixture::write_fixture(spec, gen_out);
      if (!gen_schema_out.empty())
        chantop::fixture::fixture_schema().save(gen_schema_out);
      std::cout << fmt::format("wrote {} rows to {}\n", n, gen_out);
      return 0;
    } else if (validate->parsed()) {
      chantop::knowledge::ChannelRegistry reg =
          validate_file.empty() ? chantop::knowledge::default_registry()
                                : chantop::knowledge::load_registry(
                                      validate_file);
      auto problems = chantop::knowledge::validate_registry(reg);
      if (problems.empty()) {
        if (!validate_write.empty())
          chantop::knowledge::save_registry(reg, validate_write);
        std::cout << fmt::format(
            "ok: {} channels ({} externalizing, {} combining)\n", reg.size(),
            reg.count_dimension(
                chantop::knowledge::SeciDimension::Externalization),
            reg.count_dimension(
                chantop::knowledge::SeciDimension::Combination));
        return 0;
      }
      for (const auto& p : problems) std::cerr << p << '\n';
      return 2;
    }
    std::cout << "run written to " << result.run_dir.string() << '\n';
    return 0;
  } catch (const chantop::pipeline::StageError& e) {
    std::cerr << "chantop: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "chantop: " << e.what() << '\n';
    return 1;
  }
}
