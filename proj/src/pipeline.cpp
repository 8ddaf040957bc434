#include "chantop/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "chantop/analyze.hpp"
#include "chantop/graph_io.hpp"
#include "chantop/kernels.hpp"
#include "chantop/knowledge.hpp"
#include "chantop/svg_render.hpp"
#include "chantop/version.hpp"

namespace chantop::pipeline {
namespace {

using nlohmann::json;

json params_to_json(const Params& p) {
  json t{{"perplexity", p.tsne.perplexity},
         {"iterations", p.tsne.iterations},
         {"learning_rate", p.tsne.learning_rate},
         {"momentum_early", p.tsne.momentum_early},
         {"momentum_late", p.tsne.momentum_late},
         {"momentum_switch_iter", p.tsne.momentum_switch_iter},
         {"exaggeration", p.tsne.exaggeration},
         {"exaggeration_iters", p.tsne.exaggeration_iters},
         {"init_stddev", p.tsne.init_stddev},
         {"seed", p.tsne.seed}};
  json j{{"input", p.input},
         {"schema", p.schema},
         {"registry", p.registry},
         {"channels", p.channels},
         {"top_n", p.top_n},
         {"years", p.years},
         {"tsne", t},
         {"intervals", p.intervals},
         {"overlap", p.overlap},
         {"cover_dimension", p.cover_dimension},
         {"histogram_bins", p.histogram_bins},
         {"cluster_in_embedding", p.cluster_in_embedding},
         {"min_node_size", p.min_node_size},
         {"threshold_dominant", p.threshold_dominant},
         {"threshold_strong", p.threshold_strong},
         {"group_count", p.group_count},
         {"color_channel", p.color_channel},
         {"layout", p.layout},
         {"render_seed", p.render_seed},
         {"pca_components", p.pca_components},
         {"kernels", p.kernels}};
  if (p.year) j["year"] = *p.year;
  if (p.ecosystem) j["ecosystem"] = *p.ecosystem;
  return j;
}

void params_from_json(const json& j, Params& p) {
  p.input = j.value("input", p.input);
  p.schema = j.value("schema", p.schema);
  p.registry = j.value("registry", p.registry);
  if (j.contains("channels"))
    p.channels = j.at("channels").get<std::vector<std::string>>();
  p.top_n = j.value("top_n", p.top_n);
  if (j.contains("year")) p.year = j.at("year").get<int>();
  if (j.contains("ecosystem"))
    p.ecosystem = j.at("ecosystem").get<std::string>();
  if (j.contains("years")) p.years = j.at("years").get<std::vector<int>>();
  if (j.contains("tsne")) {
    const json& t = j.at("tsne");
    p.tsne.perplexity = t.value("perplexity", p.tsne.perplexity);
    p.tsne.iterations = t.value("iterations", p.tsne.iterations);
    p.tsne.learning_rate = t.value("learning_rate", p.tsne.learning_rate);
    p.tsne.momentum_early = t.value("momentum_early", p.tsne.momentum_early);
    p.tsne.momentum_late = t.value("momentum_late", p.tsne.momentum_late);
    p.tsne.momentum_switch_iter =
        t.value("momentum_switch_iter", p.tsne.momentum_switch_iter);
    p.tsne.exaggeration = t.value("exaggeration", p.tsne.exaggeration);
    p.tsne.exaggeration_iters =
        t.value("exaggeration_iters", p.tsne.exaggeration_iters);
    p.tsne.init_stddev = t.value("init_stddev", p.tsne.init_stddev);
    p.tsne.seed = t.value("seed", p.tsne.seed);
  }
  p.intervals = j.value("intervals", p.intervals);
  p.overlap = j.value("overlap", p.overlap);
  p.cover_dimension = j.value("cover_dimension", p.cover_dimension);
  p.histogram_bins = j.value("histogram_bins", p.histogram_bins);
  p.cluster_in_embedding =
      j.value("cluster_in_embedding", p.cluster_in_embedding);
  p.min_node_size = j.value("min_node_size", p.min_node_size);
  p.threshold_dominant = j.value("threshold_dominant", p.threshold_dominant);
  p.threshold_strong = j.value("threshold_strong", p.threshold_strong);
  p.group_count = j.value("group_count", p.group_count);
  p.color_channel = j.value("color_channel", p.color_channel);
  p.layout = j.value("layout", p.layout);
  p.render_seed = j.value("render_seed", p.render_seed);
  p.pca_components = j.value("pca_components", p.pca_components);
  p.kernels = j.value("kernels", p.kernels);
}

std::string utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string utc_stamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

// Collects outputs, digests and timing for one run directory.
class RunContext {
 public:
  RunContext(std::string command, const Params& params,
             const std::filesystem::path& out_dir,
             const std::filesystem::path& out_root)
      : command_(std::move(command)),
        params_(params),
        start_(std::chrono::steady_clock::now()) {
    if (!out_dir.empty()) {
      dir_ = out_dir;
    } else {
      std::string digest =
          sha256_bytes(params.to_json_string()).substr(0, 8);
      std::filesystem::path base = out_root / (utc_stamp() + "-" + digest);
      dir_ = base;
      for (int i = 2; std::filesystem::exists(dir_); ++i)
        dir_ = base.string() + "-" + std::to_string(i);
    }
    std::filesystem::create_directories(dir_);
    if (params.kernels != "auto") kern::force_kernels(params.kernels);
  }

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path path(const std::filesystem::path& relative) {
    std::filesystem::path full = dir_ / relative;
    std::filesystem::create_directories(full.parent_path());
    outputs_.push_back(relative);
    return full;
  }

  void note_input(const std::filesystem::path& file) { inputs_.push_back(file); }

  void write_text(const std::filesystem::path& relative,
                  const std::string& text) {
    std::filesystem::path full = path(relative);
    std::ofstream out(full, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write " + full.string());
    out << text;
  }

  RunResult finish() {
    json inputs = json::array();
    for (const auto& f : inputs_)
      inputs.push_back(json{{"path", f.string()}, {"sha256", sha256_file(f)}});
    json outputs = json::array();
    for (const auto& f : outputs_)
      outputs.push_back(
          json{{"path", f.generic_string()}, {"sha256", sha256_file(dir_ / f)}});
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start_)
            .count();
    json manifest{{"tool", kToolName},
                  {"version", kToolVersion},
                  {"command", command_},
                  {"created_utc", utc_now()},
                  {"duration_seconds", seconds},
                  {"kernels", kern::active_kernels().isa},
                  {"params", params_to_json(params_)},
                  {"inputs", inputs},
                  {"outputs", outputs}};
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write manifest under " + dir_.string());
    out << manifest.dump(2) << '\n';
    RunResult result;
    result.run_dir = dir_;
    result.outputs = outputs_;
    return result;
  }

 private:
  std::string command_;
  Params params_;
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  std::chrono::steady_clock::time_point start_;
};

template <typename F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct LoadedInput {
  knowledge::ChannelRegistry registry;
  ingest::ProjectTable table;
  ingest::LoadStats stats;
  std::vector<std::string> matrix_channels;   // all registered channels
  std::vector<std::string> report_channels;   // configured subset
};

LoadedInput load_input(const Params& p, RunContext& ctx) {
  return stage("ingest", [&]() -> LoadedInput {
    LoadedInput in;
    if (p.input.empty()) throw std::runtime_error("no input file given");
    if (p.schema.empty()) throw std::runtime_error("no schema file given");
    ingest::Schema schema = ingest::Schema::load(p.schema);
    ctx.note_input(p.schema);
    if (!p.registry.empty()) {
      in.registry = knowledge::load_registry(p.registry);
      ctx.note_input(p.registry);
    } else {
      in.registry = knowledge::default_registry();
    }
    in.table = ingest::load_projects(p.input, schema, in.registry, &in.stats);
    ctx.note_input(p.input);
    in.table = ingest::top_n_by_stars(in.table, p.top_n);
    if (p.year) in.table = ingest::slice_by_year(in.table, *p.year);
    if (p.ecosystem)
      in.table = ingest::slice_by_ecosystem(in.table, *p.ecosystem);
    for (const auto& c : in.registry) in.matrix_channels.push_back(c.name);
    in.report_channels = p.channels.empty()
                             ? knowledge::default_analysis_channels()
                             : p.channels;
    for (const auto& ch : in.report_channels)
      if (in.registry.find(ch) == nullptr)
        throw std::runtime_error("report channel not registered: " + ch);
    return in;
  });
}

std::string embedding_csv(const normalize::FeatureMatrix& m,
                          const embed::FilterEmbedding& e) {
  std::string out = "id,x,y\n";
  for (std::size_t i = 0; i < e.n; ++i)
    out += fmt::format("{},{:.17g},{:.17g}\n", m.row_ids[i], e.x(i), e.y(i));
  return out;
}

std::string kl_csv(const embed::TsneDiagnostics& diag) {
  std::string out = "iteration,kl\n";
  for (const auto& [iter, kl] : diag.kl_by_iter)
    out += fmt::format("{},{:.17g}\n", iter, kl);
  return out;
}

struct TopologyArtifacts {
  normalize::FeatureMatrix matrix;
  embed::FilterEmbedding embedding;
  mapper::Cover cover;
  mapper::NerveGraph graph;
  std::vector<analyze::ClusterComponent> components;
};

// Shared by topology, evolve and compare for one table slice.
TopologyArtifacts build_topology(const Params& p, const LoadedInput& in,
                                 const ingest::ProjectTable& table,
                                 embed::TsneDiagnostics* diag = nullptr) {
  TopologyArtifacts art;
  stage("normalize", [&] {
    art.matrix = normalize::normalize_features(table, in.registry,
                                               in.matrix_channels);
    return 0;
  });
  stage("embed", [&] {
    if (art.matrix.rows < 4)
      throw std::runtime_error(
          fmt::format("need at least 4 projects, have {}", art.matrix.rows));
    embed::TsneParams tp = p.tsne;
    tp.perplexity = effective_perplexity(art.matrix.rows, tp.perplexity);
    art.embedding = embed::tsne(art.matrix, tp, diag);
    return 0;
  });
  stage("mapper", [&] {
    mapper::MapperParams mp;
    mp.intervals = p.intervals;
    mp.overlap = p.overlap;
    mp.dimension = p.cover_dimension;
    mp.histogram_bins = p.histogram_bins;
    mp.cluster_in_embedding = p.cluster_in_embedding;
    mp.min_node_size = p.min_node_size;
    art.cover = mapper::build_cover(art.embedding, mp.intervals, mp.overlap,
                                    mp.dimension);
    const double* metric = mp.cluster_in_embedding
                               ? art.embedding.coords.data()
                               : art.matrix.values.data();
    std::size_t dim = mp.cluster_in_embedding ? 2 : art.matrix.cols;
    art.graph = mapper::build_nerve(art.cover, metric, dim, art.matrix, mp);
    return 0;
  });
  stage("analyze", [&] {
    art.components = analyze::rank_components(art.graph, art.matrix);
    return 0;
  });
  return art;
}

void export_topology(const Params& p, const LoadedInput& in,
                     TopologyArtifacts& art, RunContext& ctx,
                     const std::filesystem::path& prefix,
                     const embed::TsneDiagnostics* diag) {
  stage("export", [&] {
    normalize::export_matrix(art.matrix, ctx.path(prefix / "matrix.csv"));
    ctx.write_text(prefix / "embedding.csv",
                   embedding_csv(art.matrix, art.embedding));
    if (diag != nullptr) ctx.write_text(prefix / "tsne_kl.csv", kl_csv(*diag));
    graphio::export_graph(art.graph, graphio::GraphFormat::GraphML,
                          in.report_channels,
                          ctx.path(prefix / "graph.graphml"));
    graphio::export_graph(art.graph, graphio::GraphFormat::Dot,
                          in.report_channels, ctx.path(prefix / "graph.dot"));
    graphio::export_graph(art.graph, graphio::GraphFormat::Json,
                          in.report_channels, ctx.path(prefix / "graph.json"));
    render::RenderSpec spec;
    spec.color_channel = p.color_channel;
    spec.layout = render::parse_layout(p.layout);
    spec.seed = p.render_seed;
    render::render_svg(art.graph, &art.cover, spec,
                       ctx.path(prefix / "graph.svg"));
    analyze::Thresholds th{p.threshold_dominant, p.threshold_strong};
    ctx.write_text(prefix / "components.txt",
                   analyze::render_components_text(art.components));
    ctx.write_text(prefix / "components.csv",
                   analyze::render_components_dsv(art.components));
    ctx.write_text(
        prefix / "dominance.txt",
        analyze::render_dominance_text(art.components, art.matrix,
                                       in.report_channels, th));
    ctx.write_text(
        prefix / "dominance.csv",
        analyze::render_dominance_dsv(art.components, art.matrix,
                                      in.report_channels, th));
    return 0;
  });
}

std::string safe_dirname(const std::string& name) {
  std::string out;
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out.empty() ? "_" : out;
}

}  // namespace

std::string Params::to_json_string() const {
  return params_to_json(*this).dump(2);
}

Params Params::from_json_string(const std::string& text) {
  Params p;
  params_from_json(json::parse(text), p);
  return p;
}

void Params::apply_json_string(const std::string& text) {
  params_from_json(json::parse(text), *this);
}

double effective_perplexity(std::size_t n, double requested) {
  double cap = (static_cast<double>(n) - 1.0) / 3.0;
  return std::max(2.0, std::min(requested, cap));
}

std::string sha256_bytes(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string sha256_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file: " + file.string());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

ReplayInfo read_manifest(const std::filesystem::path& manifest_file) {
  std::ifstream in(manifest_file);
  if (!in)
    throw std::runtime_error("cannot open manifest: " + manifest_file.string());
  json j = json::parse(in);
  ReplayInfo info;
  info.command = j.at("command").get<std::string>();
  params_from_json(j.at("params"), info.params);
  return info;
}

RunResult run_topology(const Params& params,
                       const std::filesystem::path& out_dir,
                       const std::filesystem::path& out_root) {
  RunContext ctx("topology", params, out_dir, out_root);
  LoadedInput in = load_input(params, ctx);
  embed::TsneDiagnostics diag;
  TopologyArtifacts art = build_topology(params, in, in.table, &diag);
  export_topology(params, in, art, ctx, "", &diag);
  return stage("manifest", [&] { return ctx.finish(); });
}

RunResult run_evolve(const Params& params,
                     const std::filesystem::path& out_dir,
                     const std::filesystem::path& out_root) {
  RunContext ctx("evolve", params, out_dir, out_root);
  LoadedInput in = load_input(params, ctx);

  std::vector<int> periods = params.years;
  if (periods.empty()) {
    std::set<int> seen;
    for (const auto& rec : in.table.records) seen.insert(rec.created.year);
    periods.assign(seen.begin(), seen.end());
  }
  std::sort(periods.begin(), periods.end());

  std::map<int, TopologyArtifacts> artifacts;
  std::vector<std::string> skipped;
  for (int year : periods) {
    ingest::ProjectTable slice = ingest::slice_by_year(in.table, year);
    if (slice.size() < 4) {
      skipped.push_back(fmt::format("{} ({} projects)", year, slice.size()));
      continue;
    }
    artifacts.emplace(year, build_topology(params, in, slice));
  }
  if (artifacts.empty())
    throw StageError("analyze", "no period has enough projects");

  analyze::Thresholds th{params.threshold_dominant, params.threshold_strong};
  std::map<int, analyze::PeriodSlice> slices;
  for (auto& [year, art] : artifacts)
    slices[year] = {&art.graph, &art.matrix};
  auto report = stage("analyze", [&] {
    return analyze::evolution_report(slices, params.group_count,
                                     in.report_channels, th);
  });

  for (auto& [year, art] : artifacts)
    export_topology(params, in, art, ctx, std::to_string(year), nullptr);
  stage("export", [&] {
    std::string text = analyze::render_evolution_text(report);
    if (!skipped.empty()) {
      text += "skipped periods:";
      for (const auto& s : skipped) text += " " + s;
      text += '\n';
    }
    ctx.write_text("evolution.txt", text);
    ctx.write_text("evolution.csv", analyze::render_evolution_dsv(report));
    return 0;
  });
  return stage("manifest", [&] { return ctx.finish(); });
}

RunResult run_compare(const Params& params,
                      const std::filesystem::path& out_dir,
                      const std::filesystem::path& out_root) {
  RunContext ctx("compare", params, out_dir, out_root);
  LoadedInput in = load_input(params, ctx);

  std::set<std::string> ecosystems;
  for (const auto& rec : in.table.records) ecosystems.insert(rec.ecosystem);

  analyze::Thresholds th{params.threshold_dominant, params.threshold_strong};
  std::string combined;
  std::vector<std::string> skipped;
  bool any = false;
  for (const auto& eco : ecosystems) {
    ingest::ProjectTable slice = ingest::slice_by_ecosystem(in.table, eco);
    if (slice.size() < 4) {
      skipped.push_back(fmt::format("{} ({} projects)", eco, slice.size()));
      continue;
    }
    TopologyArtifacts art = build_topology(params, in, slice);
    auto report = stage("analyze", [&] {
      return analyze::popularity_groups(art.graph, art.matrix,
                                        in.report_channels, th,
                                        params.group_count);
    });
    std::filesystem::path prefix = safe_dirname(eco);
    export_topology(params, in, art, ctx, prefix, nullptr);
    stage("export", [&] {
      std::string text = analyze::render_popularity_text(
          report, in.report_channels, "ecosystem: " + eco);
      ctx.write_text(prefix / "popularity.txt", text);
      ctx.write_text(prefix / "popularity.csv",
                     analyze::render_popularity_dsv(report,
                                                    in.report_channels));
      combined += text + '\n';
      return 0;
    });
    any = true;
  }
  if (!any) throw StageError("analyze", "no ecosystem has enough projects");
  stage("export", [&] {
    if (!skipped.empty()) {
      combined += "skipped ecosystems:";
      for (const auto& s : skipped) combined += " " + s;
      combined += '\n';
    }
    ctx.write_text("popularity.txt", combined);
    return 0;
  });
  return stage("manifest", [&] { return ctx.finish(); });
}

RunResult run_pca_baseline(const Params& params,
                           const std::filesystem::path& out_dir,
                           const std::filesystem::path& out_root) {
  RunContext ctx("pca-baseline", params, out_dir, out_root);
  LoadedInput in = load_input(params, ctx);
  normalize::FeatureMatrix matrix = stage("normalize", [&] {
    return normalize::normalize_features(in.table, in.registry,
                                         in.matrix_channels);
  });
  embed::PcaResult result = stage("embed", [&] {
    if (matrix.rows == 0) throw std::runtime_error("no projects after filters");
    return embed::pca(matrix, params.pca_components);
  });
  stage("export", [&] {
    normalize::export_matrix(matrix, ctx.path("matrix.csv"));
    ctx.write_text("pca_embedding.csv",
                   embedding_csv(matrix, result.embedding));
    std::string summary = "component,explained_variance_ratio";
    for (const auto& ch : matrix.col_channels) summary += "," + ch;
    summary += '\n';
    for (std::size_t c = 0; c < result.k; ++c) {
      summary += fmt::format("{},{:.17g}", c + 1,
                             result.explained_variance_ratio[c]);
      for (std::size_t j = 0; j < result.d; ++j)
        summary += fmt::format(",{:.17g}", result.components[c * result.d + j]);
      summary += '\n';
    }
    ctx.write_text("pca_summary.csv", summary);
    json j{{"components_kept", result.k},
           {"explained_variance_ratio", result.explained_variance_ratio},
           {"cumulative_ratio", result.embedding.final_objective}};
    ctx.write_text("pca_summary.json", j.dump(2) + "\n");
    return 0;
  });
  return stage("manifest", [&] { return ctx.finish(); });
}

}  // namespace chantop::pipeline
