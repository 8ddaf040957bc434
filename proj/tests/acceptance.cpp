// Acceptance gate. Each criterion prints exactly one PASS/FAIL line and the
// process exits nonzero when any of them fail. Tolerances and runtime
// budgets are constants in this file on purpose: loosening one is a visible
// code change, not a flag.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "chantop/analyze.hpp"
#include "chantop/embed.hpp"
#include "chantop/fixture.hpp"
#include "chantop/ingest.hpp"
#include "chantop/kernels.hpp"
#include "chantop/knowledge.hpp"
#include "chantop/mapper.hpp"
#include "chantop/normalize.hpp"
#include "chantop/pipeline.hpp"
#include "chantop/rng.hpp"

namespace fs = std::filesystem;
using chantop::Rng;

namespace {

std::string read_file(const fs::path& p) {
  std::string out;
  if (FILE* f = std::fopen(p.string().c_str(), "rb")) {
    char buf[1 << 14];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    std::fclose(f);
  }
  return out;
}

double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

// ---------------------------------------------------------------- criterion 1

std::vector<std::string> check_registry_table() {
  namespace kn = chantop::knowledge;
  std::vector<std::string> bad;

  struct Row {
    const char* name;
    std::vector<const char*> codes;
    kn::SeciDimension dim;
    kn::ValueKind kind;
  };
  const kn::SeciDimension ext = kn::SeciDimension::Externalization;
  const kn::SeciDimension comb = kn::SeciDimension::Combination;
  const std::vector<Row> table = {
      {"GitHub Pages", {"T2", "T3"}, ext, kn::ValueKind::Flag},
      {"Readme", {"T3", "T4"}, ext, kn::ValueKind::Flag},
      {"Security Audit", {"T2", "E3"}, ext, kn::ValueKind::Text},
      {"Wiki", {"T2", "T3"}, ext, kn::ValueKind::Flag},
      {"Changelog", {"E2", "E3"}, comb, kn::ValueKind::Text},
      {"Code of Conduct", {"E2", "E3"}, comb, kn::ValueKind::Text},
      {"Contributing Guidelines", {"E2", "E3", "E4"}, comb,
       kn::ValueKind::Text},
      {"Fork", {"E2", "E3", "E4"}, comb, kn::ValueKind::Flag},
      {"Issue Tracker", {"E2", "E4"}, comb, kn::ValueKind::Flag},
      {"License", {"E2", "E3"}, comb, kn::ValueKind::Text},
      {"Security Threat Model", {"E2", "E3", "E4"}, comb, kn::ValueKind::Flag},
      {"# of Forks", {"E2", "E4"}, comb, kn::ValueKind::Count},
      {"# of Open Issues", {"E2", "E4"}, comb, kn::ValueKind::Count},
  };

  const kn::ChannelRegistry& reg = kn::default_registry();
  if (reg.size() != 13)
    bad.push_back(fmt::format("registry has {} channels, want 13", reg.size()));
  if (reg.count_dimension(ext) != 4)
    bad.push_back(fmt::format("{} externalizing channels, want 4",
                              reg.count_dimension(ext)));
  if (reg.count_dimension(comb) != 9)
    bad.push_back(fmt::format("{} combining channels, want 9",
                              reg.count_dimension(comb)));

  for (const auto& row : table) {
    const kn::ChannelDescriptor* ch = reg.find(row.name);
    if (ch == nullptr) {
      bad.push_back(fmt::format("missing channel '{}'", row.name));
      continue;
    }
    std::vector<kn::KnowledgeCode> want;
    for (const char* c : row.codes) want.push_back(kn::parse_code(c));
    if (ch->codes != want)
      bad.push_back(fmt::format("'{}' has the wrong code set", row.name));
    if (ch->dimension != row.dim)
      bad.push_back(fmt::format("'{}' has the wrong dimension", row.name));
    if (ch->value_kind != row.kind)
      bad.push_back(fmt::format("'{}' has the wrong value kind", row.name));
    if (kn::derive_dimension(ch->codes) != ch->dimension)
      bad.push_back(
          fmt::format("'{}' dimension contradicts its codes", row.name));
  }
  return bad;
}

// ---------------------------------------------------------------- criterion 2

std::vector<std::string> check_normalization(const fs::path& work) {
  namespace kn = chantop::knowledge;
  std::vector<std::string> bad;

  auto spec = chantop::fixture::preset("uniform", 20230823, 1000);
  fs::path csv = work / "norm.csv";
  chantop::fixture::write_fixture(spec, csv);
  const kn::ChannelRegistry& reg = kn::default_registry();
  auto table = chantop::ingest::load_projects(
      csv, chantop::fixture::fixture_schema(), reg);
  if (table.size() != 1000)
    bad.push_back(fmt::format("fixture loaded {} rows, want 1000",
                              table.size()));

  std::vector<std::string> all;
  for (const auto& ch : reg) all.push_back(ch.name);
  auto m = chantop::normalize::normalize_features(table, reg, all);

  std::size_t out_of_range = 0;
  for (double v : m.values)
    if (!(v >= 0.0 && v <= 1.0)) ++out_of_range;
  if (out_of_range > 0)
    bad.push_back(fmt::format("{} entries outside [0,1]", out_of_range));

  // Every count column that has activity inside an ecosystem must peak at
  // an exact 1.0 there.
  for (const auto& ch : reg) {
    if (ch.value_kind != kn::ValueKind::Count) continue;
    std::size_t col = m.col_index(ch.name);
    std::map<std::string, double> eco_max;
    for (std::size_t r = 0; r < m.rows; ++r) {
      double& mx = eco_max[m.row_ecosystems[r]];
      mx = std::max(mx, m.at(r, col));
    }
    for (const auto& [eco, mx] : eco_max)
      if (mx > 0.0 && mx != 1.0)
        bad.push_back(fmt::format("'{}' in {} peaks at {} instead of 1.0",
                                  ch.name, eco, mx));
  }

  // Multiplying every raw count by 7 rescales the maxima by the same factor
  // and must leave the normalized matrix bit-identical.
  auto scaled = table;
  for (auto& rec : scaled.records)
    for (auto& [name, value] : rec.channel_values)
      if (value.kind == chantop::ingest::RawValue::Kind::Count)
        value.count *= 7;
  auto m7 = chantop::normalize::normalize_features(scaled, reg, all);
  if (m7.values.size() != m.values.size() ||
      std::memcmp(m7.values.data(), m.values.data(),
                  m.values.size() * sizeof(double)) != 0)
    bad.push_back("count scaling by 7 changed the normalized matrix");
  return bad;
}

// ---------------------------------------------------------------- criterion 3

std::vector<std::string> check_affinities() {
  std::vector<std::string> bad;
  const std::size_t n = 50;
  const std::size_t d = 5;
  const double target = 10.0;
  const double perp_tol = 1e-3;
  const double sum_tol = 1e-9;

  Rng rng(303);
  std::vector<double> x(n * d);
  for (double& v : x) v = rng.uniform(-2.0, 2.0);
  auto aff = chantop::embed::conditional_affinities(x.data(), n, d, target);

  // Recompute each row's effective neighbor count from the reported
  // bandwidth, from first principles in extended precision.
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    long double beta = 0.5L / (static_cast<long double>(aff.sigmas[i]) *
                               aff.sigmas[i]);
    std::vector<long double> w(n, 0.0L);
    long double sum = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      w[j] = std::exp(-beta * sq_dist(&x[i * d], &x[j * d], d));
      sum += w[j];
    }
    long double h_bits = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || w[j] <= 0.0L) continue;
      long double pj = w[j] / sum;
      h_bits -= pj * std::log2(pj);
    }
    double perp = static_cast<double>(std::pow(2.0L, h_bits));
    worst = std::max(worst, std::abs(perp - target));
  }
  if (worst > perp_tol)
    bad.push_back(fmt::format(
        "row neighbor count off by {:.3g} (tolerance {:g})", worst, perp_tol));

  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double pij = aff.at(i, j);
      if (pij < 0.0) bad.push_back("negative affinity entry");
      if (i == j && pij != 0.0) bad.push_back("nonzero affinity diagonal");
      if (pij != aff.at(j, i)) {
        bad.push_back("affinity matrix is not symmetric");
        i = n;
        break;
      }
      total += pij;
    }
  if (std::abs(static_cast<double>(total) - 1.0) > sum_tol)
    bad.push_back(fmt::format("affinities sum to {:.12f}, want 1 within {:g}",
                              static_cast<double>(total), sum_tol));

  // Three mutually equidistant points: every conditional must be exactly
  // one half and every symmetrized off-diagonal exactly 1/6.
  const double tri[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  auto ta = chantop::embed::conditional_affinities(tri, 3, 3, 2.0);
  for (std::size_t i = 0; i < 3; ++i) {
    double beta = 0.5 / (ta.sigmas[i] * ta.sigmas[i]);
    double w = std::exp(-beta * 2.0);
    double conditional = w / (w + w);
    if (conditional != 0.5)
      bad.push_back(fmt::format("equidistant conditional is {} not 0.5",
                                conditional));
  }
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j && ta.at(i, j) != 1.0 / 6.0)
        bad.push_back("equidistant joint affinity is not exactly 1/6");
  return bad;
}

// ---------------------------------------------------------------- criterion 4

// Exact objective recomputed in extended precision, independent of the
// production kernels.
long double kl_objective(const std::vector<double>& p,
                         const std::vector<double>& y, std::size_t n) {
  std::vector<long double> w(n * n, 0.0L);
  long double sum_w = 0.0L;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      long double dx = y[2 * i] - y[2 * j];
      long double dy = y[2 * i + 1] - y[2 * j + 1];
      long double wij = 1.0L / (1.0L + dx * dx + dy * dy);
      w[i * n + j] = w[j * n + i] = wij;
      sum_w += 2.0L * wij;
    }
  long double kl = 0.0L;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      long double pij = p[i * n + j];
      if (pij <= 0.0L) continue;
      kl += pij * std::log(pij / (w[i * n + j] / sum_w));
    }
  return kl;
}

std::vector<std::string> check_gradient() {
  std::vector<std::string> bad;
  const double step = 1e-5;
  const double grad_tol = 1e-4;

  const std::size_t n = 20;
  const std::size_t d = 4;
  Rng rng(404);
  std::vector<double> x(n * d);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  auto aff = chantop::embed::conditional_affinities(x.data(), n, d, 5.0);

  std::vector<double> y(2 * n);
  for (double& v : y) v = rng.uniform(-1.0, 1.0);
  std::vector<double> y0(n), y1(n);
  for (std::size_t i = 0; i < n; ++i) {
    y0[i] = y[2 * i];
    y1[i] = y[2 * i + 1];
  }

  const auto& kern = chantop::kern::active_kernels();
  std::vector<double> w(n * n);
  double sum_w = kern.studentt_weights(y0.data(), y1.data(), n, w.data());
  std::vector<double> g0(n), g1(n);
  kern.kl_gradient(aff.p.data(), w.data(), sum_w, y0.data(), y1.data(), n,
                   g0.data(), g1.data());

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (int axis = 0; axis < 2; ++axis) {
      double analytic = axis == 0 ? g0[i] : g1[i];
      std::vector<double> probe = y;
      probe[2 * i + axis] = y[2 * i + axis] + step;
      long double hi = kl_objective(aff.p, probe, n);
      probe[2 * i + axis] = y[2 * i + axis] - step;
      long double lo = kl_objective(aff.p, probe, n);
      double fd = static_cast<double>((hi - lo) / (2.0L * step));
      double rel = std::abs(analytic - fd) / std::max(std::abs(fd), 1e-8);
      worst = std::max(worst, rel);
    }
  if (worst >= grad_tol)
    bad.push_back(fmt::format(
        "gradient relative error {:.3g} (tolerance {:g})", worst, grad_tol));

  // The objective must end at or below its value right after the early
  // attraction boost is removed, for every seed tried.
  const std::size_t big = 200;
  const std::size_t bd = 6;
  Rng brng(405);
  std::vector<double> bx(big * bd);
  for (double& v : bx) v = brng.uniform(0.0, 1.0);
  for (std::uint64_t seed : {1, 2, 3}) {
    chantop::embed::TsneParams tp;
    tp.iterations = 600;
    tp.seed = seed;
    auto emb = chantop::embed::tsne_points(bx.data(), big, bd, tp);
    if (!(emb.final_objective <= emb.kl_post_exaggeration))
      bad.push_back(fmt::format(
          "seed {}: final objective {:.6f} above post-boost value {:.6f}",
          seed, emb.final_objective, emb.kl_post_exaggeration));
  }
  return bad;
}

// ---------------------------------------------------------------- criterion 5

// Cyclic Jacobi eigensolver for small symmetric matrices; rows of v end up
// holding the eigenvectors of the largest eigenvalues first.
void jacobi_eigen(std::vector<double>& a, std::size_t d,
                  std::vector<double>& eigvals, std::vector<double>& v) {
  v.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += std::abs(a[p * d + q]);
    if (off < 1e-15) break;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) {
        double apq = a[p * d + q];
        if (apq == 0.0) continue;
        double theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          double akp = a[k * d + p];
          double akq = a[k * d + q];
          a[k * d + p] = c * akp - s * akq;
          a[k * d + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          double apk = a[p * d + k];
          double aqk = a[q * d + k];
          a[p * d + k] = c * apk - s * aqk;
          a[q * d + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          double vkp = v[k * d + p];
          double vkq = v[k * d + q];
          v[k * d + p] = c * vkp - s * vkq;
          v[k * d + q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return a[l * d + l] > a[r * d + r];
  });
  eigvals.resize(d);
  std::vector<double> sorted(d * d);
  for (std::size_t c = 0; c < d; ++c) {
    eigvals[c] = a[order[c] * d + order[c]];
    for (std::size_t k = 0; k < d; ++k)
      sorted[c * d + k] = v[k * d + order[c]];  // row c = eigenvector c
  }
  v = std::move(sorted);
}

std::vector<std::string> check_pca() {
  std::vector<std::string> bad;
  const double comp_tol = 1e-8;
  const double ortho_tol = 1e-10;
  const std::size_t n = 5;
  const std::size_t d = 3;

  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(500 + trial);
    std::vector<double> x(n * d);
    for (double& v : x) v = rng.uniform(-3.0, 3.0);

    auto result = chantop::embed::pca_points(x.data(), n, d, d);

    // Covariance of the centered data, eigendecomposed independently.
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) mean[j] += x[i * d + j];
    for (double& m : mean) m /= static_cast<double>(n);
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          s += (x[i * d + a] - mean[a]) * (x[i * d + b] - mean[b]);
        cov[a * d + b] = s / static_cast<double>(n - 1);
      }
    double trace = cov[0] + cov[1 * d + 1] + cov[2 * d + 2];
    std::vector<double> eigvals, vecs;
    jacobi_eigen(cov, d, eigvals, vecs);

    for (std::size_t c = 0; c < d; ++c) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        dot += result.components[c * d + k] * vecs[c * d + k];
      double sign = dot >= 0.0 ? 1.0 : -1.0;
      double diff = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        diff = std::max(diff, std::abs(result.components[c * d + k] -
                                       sign * vecs[c * d + k]));
      if (diff > comp_tol)
        bad.push_back(fmt::format(
            "trial {}: component {} off by {:.3g} (tolerance {:g})", trial, c,
            diff, comp_tol));
      double evr = eigvals[c] / trace;
      if (std::abs(result.explained_variance_ratio[c] - evr) > comp_tol)
        bad.push_back(fmt::format("trial {}: variance ratio {} mismatch",
                                  trial, c));
    }
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k)
          dot += result.components[a * d + k] * result.components[b * d + k];
        double want = a == b ? 1.0 : 0.0;
        if (std::abs(dot - want) > ortho_tol)
          bad.push_back(fmt::format("trial {}: components not orthonormal",
                                    trial));
      }
    if (bad.size() > 8) return bad;  // enough detail
  }

  // A rank-one matrix concentrates all variance in the first component.
  std::vector<double> r1(n * d);
  const double u[n] = {1, 2, 3, 4, 5};
  const double vrow[d] = {2.0, -1.0, 0.5};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) r1[i * d + j] = u[i] * vrow[j];
  auto rk = chantop::embed::pca_points(r1.data(), n, d, 2);
  if (std::abs(rk.explained_variance_ratio[0] - 1.0) > 1e-9 ||
      std::abs(rk.explained_variance_ratio[1]) > 1e-9)
    bad.push_back(fmt::format("rank-1 variance ratios ({:.12f}, {:.3g})",
                              rk.explained_variance_ratio[0],
                              rk.explained_variance_ratio[1]));
  return bad;
}

// ---------------------------------------------------------------- criterion 6

std::vector<std::string> check_nerve() {
  std::vector<std::string> bad;
  const std::size_t n = 200;

  for (int inst = 0; inst < 100 && bad.size() < 8; ++inst) {
    Rng rng(6000 + inst);
    chantop::embed::FilterEmbedding emb;
    emb.n = n;
    emb.coords.resize(2 * n);
    for (double& v : emb.coords) v = rng.uniform();

    chantop::normalize::FeatureMatrix f;
    f.rows = n;
    f.cols = 3;
    f.values.resize(n * 3);
    for (double& v : f.values) v = rng.uniform();
    f.col_channels = {"f0", "f1", "f2"};
    for (std::size_t i = 0; i < n; ++i) {
      f.row_ids.push_back(fmt::format("p{}", i));
      f.row_ecosystems.push_back("x");
      f.row_stars.push_back(1);
    }

    int intervals = 4 + inst % 9;              // 4..12
    double overlap = 0.2 + 0.05 * (inst % 9);  // 0.2..0.6
    auto cover = chantop::mapper::build_cover(emb, intervals, overlap, 2);

    std::vector<bool> covered(n, false);
    for (const auto& bin : cover.bins)
      for (std::size_t p : bin.points) covered[p] = true;
    for (std::size_t p = 0; p < n; ++p)
      if (!covered[p]) {
        bad.push_back(fmt::format("instance {}: point {} not covered", inst, p));
        break;
      }

    chantop::mapper::MapperParams mp;
    mp.intervals = intervals;
    mp.overlap = overlap;
    auto graph = chantop::mapper::build_nerve(cover, f.values.data(), 3, f, mp);

    // Brute force: an edge exactly when two node member lists intersect,
    // weighted by the size of the intersection.
    std::vector<chantop::mapper::NerveEdge> expect;
    for (std::size_t a = 0; a < graph.nodes.size(); ++a)
      for (std::size_t b = a + 1; b < graph.nodes.size(); ++b) {
        std::vector<std::size_t> common;
        std::set_intersection(graph.nodes[a].members.begin(),
                              graph.nodes[a].members.end(),
                              graph.nodes[b].members.begin(),
                              graph.nodes[b].members.end(),
                              std::back_inserter(common));
        if (!common.empty()) expect.push_back({a, b, common.size()});
      }
    if (graph.edges != expect)
      bad.push_back(fmt::format(
          "instance {}: edge set differs from the pairwise oracle ({} vs {})",
          inst, graph.edges.size(), expect.size()));
  }
  return bad;
}

// ---------------------------------------------------------------- criterion 7

struct BuiltTopology {
  chantop::normalize::FeatureMatrix matrix;
  chantop::embed::FilterEmbedding embedding;
  chantop::mapper::NerveGraph graph;
  std::vector<chantop::analyze::ClusterComponent> components;
};

BuiltTopology build_from_table(const chantop::ingest::ProjectTable& table,
                               std::uint64_t tsne_seed) {
  const auto& reg = chantop::knowledge::default_registry();
  std::vector<std::string> all;
  for (const auto& ch : reg) all.push_back(ch.name);

  BuiltTopology t;
  t.matrix = chantop::normalize::normalize_features(table, reg, all);
  chantop::embed::TsneParams tp;
  tp.seed = tsne_seed;
  tp.perplexity = chantop::pipeline::effective_perplexity(t.matrix.rows,
                                                          tp.perplexity);
  t.embedding = chantop::embed::tsne(t.matrix, tp);
  chantop::mapper::MapperParams mp;
  t.graph = chantop::mapper::build_mapper(t.embedding, t.matrix, mp);
  t.components = chantop::analyze::rank_components(t.graph, t.matrix);
  return t;
}

std::string majority_label(const chantop::analyze::ClusterComponent& comp,
                           const std::vector<std::string>& row_ids) {
  std::map<std::string, std::size_t> votes;
  for (std::size_t p : comp.point_ids) {
    const std::string& id = row_ids[p];
    votes[id.substr(0, id.find('-'))]++;
  }
  std::string best;
  std::size_t best_n = 0;
  for (const auto& [label, count] : votes)
    if (count > best_n) {
      best = label;
      best_n = count;
    }
  return best;
}

std::vector<std::string> check_recovery(const fs::path& work) {
  std::vector<std::string> bad;
  const double min_agreement = 0.95;

  auto spec = chantop::fixture::preset("blobs3", 77, 2000);
  fs::path csv = work / "blobs.csv";
  chantop::fixture::write_fixture(spec, csv);
  auto table = chantop::ingest::load_projects(
      csv, chantop::fixture::fixture_schema(),
      chantop::knowledge::default_registry());

  BuiltTopology t = build_from_table(table, 5);
  if (t.matrix.cols != 13)
    bad.push_back(fmt::format("{} feature columns, want 13", t.matrix.cols));
  if (t.components.size() != 3) {
    bad.push_back(fmt::format("{} graph components, want exactly 3",
                              t.components.size()));
    return bad;
  }

  // The three populations and the channels each one actually exercises.
  // Count channels scale against the per-ecosystem maximum, so only the
  // population holding that maximum clears the activity threshold.
  const std::map<std::string, std::set<std::string>> planted = {
      {"A",
       {"GitHub Pages", "Readme", "Wiki", "Issue Tracker", "License",
        "# of Forks"}},
      {"B",
       {"Changelog", "Code of Conduct", "Contributing Guidelines", "License",
        "Fork", "# of Open Issues"}},
      {"C", {"Security Audit", "Security Threat Model", "Issue Tracker",
             "Fork"}},
  };

  chantop::analyze::Thresholds th{0.5, 0.8};
  std::set<std::string> seen;
  for (const auto& comp : t.components) {
    std::string label = majority_label(comp, t.matrix.row_ids);
    seen.insert(label);
    auto it = planted.find(label);
    if (it == planted.end()) {
      bad.push_back(fmt::format("component {} maps to unknown population '{}'",
                                comp.rank, label));
      continue;
    }
    auto levels = chantop::analyze::dominant_features(
        comp, t.matrix, t.matrix.col_channels, th);
    std::size_t agree = 0;
    for (const auto& ch : t.matrix.col_channels) {
      bool active =
          levels.at(ch) != chantop::analyze::DominanceLevel::Absent;
      bool expected = it->second.contains(ch);
      if (active == expected) ++agree;
    }
    double fraction =
        static_cast<double>(agree) / static_cast<double>(t.matrix.cols);
    if (fraction < min_agreement)
      bad.push_back(fmt::format(
          "population '{}' recovered {}/{} channels ({:.0f}%, need {:.0f}%)",
          label, agree, t.matrix.cols, 100.0 * fraction,
          100.0 * min_agreement));
  }
  if (seen.size() != 3)
    bad.push_back(fmt::format("components map to {} distinct populations",
                              seen.size()));
  return bad;
}

// ---------------------------------------------------------------- criterion 8

std::vector<std::string> check_trends(const fs::path& work) {
  namespace an = chantop::analyze;
  std::vector<std::string> bad;
  const an::Thresholds th{0.5, 0.8};
  const auto& channels = chantop::knowledge::default_analysis_channels();
  const std::string fading = "Contributing Guidelines";

  // A population whose contributing guidelines die out year over year.
  auto spec = chantop::fixture::preset("decline", 7, 1200);
  fs::path csv = work / "decline.csv";
  chantop::fixture::write_fixture(spec, csv);
  auto table = chantop::ingest::load_projects(
      csv, chantop::fixture::fixture_schema(),
      chantop::knowledge::default_registry());

  std::map<int, BuiltTopology> years;
  for (int year : {2015, 2016, 2017})
    years.emplace(year,
                  build_from_table(chantop::ingest::slice_by_year(table, year),
                                   42));
  std::map<int, an::PeriodSlice> slices;
  for (auto& [year, t] : years) slices[year] = {&t.graph, &t.matrix};
  auto report = an::evolution_report(slices, 1, channels, th);

  if (report.rows.size() != 3) {
    bad.push_back(fmt::format("evolution report has {} rows, want 3",
                              report.rows.size()));
    return bad;
  }
  const an::EvolutionRow* first = nullptr;
  const an::EvolutionRow* last = nullptr;
  for (const auto& row : report.rows) {
    if (row.period == 2015) first = &row;
    if (row.period == 2017) last = &row;
  }
  if (first == nullptr || last == nullptr) {
    bad.push_back("evolution report is missing a period");
    return bad;
  }
  if (first->levels.at(fading) == an::DominanceLevel::Absent)
    bad.push_back("fading channel already absent in the first period");
  if (last->levels.at(fading) != an::DominanceLevel::Absent)
    bad.push_back("fading channel still dominant in the last period");

  // Three populations with separated star ranges: the highest-median one
  // must be the popular group, and scaling all stars by 1000 must not move
  // any label.
  auto pspec = chantop::fixture::preset("popularity", 7, 900);
  fs::path pcsv = work / "popularity.csv";
  chantop::fixture::write_fixture(pspec, pcsv);
  auto ptable = chantop::ingest::load_projects(
      pcsv, chantop::fixture::fixture_schema(),
      chantop::knowledge::default_registry());

  BuiltTopology pt = build_from_table(ptable, 42);
  auto groups = an::popularity_groups(pt.graph, pt.matrix, channels, th, 3);
  if (groups.groups.size() != 3) {
    bad.push_back(fmt::format("{} popularity groups, want 3",
                              groups.groups.size()));
    return bad;
  }
  const an::PopularityGroup* popular = nullptr;
  double best_median = -1.0;
  std::size_t best_rank = 0;
  for (const auto& g : groups.groups) {
    if (g.label == "Popular") popular = &g;
    if (g.star_median > best_median) {
      best_median = g.star_median;
      best_rank = g.component_rank;
    }
  }
  if (popular == nullptr) {
    bad.push_back("no group labeled Popular");
  } else {
    if (popular->component_rank != best_rank)
      bad.push_back("Popular label not on the highest-median group");
    if (popular->star_median < 5000.0)
      bad.push_back(fmt::format(
          "Popular group median {} below the planted high-star range",
          popular->star_median));
  }

  auto scaled = ptable;
  for (auto& rec : scaled.records) rec.stars *= 1000;
  BuiltTopology st = build_from_table(scaled, 42);
  auto sgroups = an::popularity_groups(st.graph, st.matrix, channels, th, 3);
  if (sgroups.groups.size() != groups.groups.size()) {
    bad.push_back("star scaling changed the group count");
    return bad;
  }
  for (std::size_t i = 0; i < groups.groups.size(); ++i) {
    if (sgroups.groups[i].label != groups.groups[i].label ||
        sgroups.groups[i].component_rank != groups.groups[i].component_rank) {
      bad.push_back("star scaling by 1000 moved a group label");
      break;
    }
  }
  return bad;
}

// ---------------------------------------------------------------- criterion 9

int run_cli(const std::string& args, const fs::path& log) {
  std::string cmd = fmt::format("\"{}\" {} > \"{}\" 2>&1", CHANTOP_CLI_PATH,
                                args, log.string());
  return std::system(cmd.c_str());
}

std::string log_excerpt(const fs::path& log) {
  std::string text = read_file(log);
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text.substr(0, 240);
}

std::vector<std::string> check_replay(const fs::path& work) {
  std::vector<std::string> bad;

  auto spec = chantop::fixture::preset("uniform", 13, 300);
  fs::path csv = work / "replay.csv";
  fs::path cfg = work / "replay.cfg";
  chantop::fixture::write_fixture(spec, csv);
  chantop::fixture::fixture_schema().save(cfg);

  fs::path first = work / "replay-first";
  fs::path log = work / "replay.log";
  int rc = run_cli(
      fmt::format("topology --input \"{}\" --schema \"{}\" --iterations 400 "
                  "--out \"{}\"",
                  csv.string(), cfg.string(), first.string()),
      log);
  if (rc != 0) {
    bad.push_back(fmt::format("initial run exited {}: {}", rc,
                              log_excerpt(log)));
    return bad;
  }

  fs::path manifest = first / "manifest.json";
  std::vector<fs::path> replays{work / "replay-a", work / "replay-b"};
  for (const auto& dir : replays) {
    rc = run_cli(fmt::format("topology --manifest \"{}\" --out \"{}\"",
                             manifest.string(), dir.string()),
                 log);
    if (rc != 0) {
      bad.push_back(fmt::format("replay into {} exited {}: {}",
                                dir.filename().string(), rc,
                                log_excerpt(log)));
      return bad;
    }
  }

  const char* files[] = {"graph.graphml", "graph.json",    "graph.dot",
                         "graph.svg",     "matrix.csv",    "embedding.csv",
                         "tsne_kl.csv",   "components.txt", "components.csv",
                         "dominance.txt", "dominance.csv"};
  for (const char* f : files) {
    std::string a = read_file(replays[0] / f);
    std::string b = read_file(replays[1] / f);
    std::string o = read_file(first / f);
    if (a.empty())
      bad.push_back(fmt::format("replay output {} is missing or empty", f));
    else if (a != b)
      bad.push_back(fmt::format("{} differs between the two replays", f));
    else if (a != o)
      bad.push_back(fmt::format("{} differs from the original run", f));
  }
  return bad;
}

// --------------------------------------------------------------- criterion 10

std::vector<std::string> check_manifest(const fs::path& dir,
                                        const std::string& command) {
  std::vector<std::string> bad;
  fs::path file = dir / "manifest.json";
  if (!fs::exists(file)) {
    bad.push_back(fmt::format("{} has no manifest", dir.filename().string()));
    return bad;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(file));
  } catch (const std::exception& e) {
    bad.push_back(fmt::format("manifest does not parse: {}", e.what()));
    return bad;
  }
  for (const char* key :
       {"tool", "version", "command", "created_utc", "params", "inputs",
        "outputs", "kernels"})
    if (!j.contains(key))
      bad.push_back(fmt::format("manifest lacks '{}'", key));
  if (!bad.empty()) return bad;
  if (j.at("command") != command)
    bad.push_back(fmt::format("manifest command '{}', want '{}'",
                              j.at("command").get<std::string>(), command));
  if (j.at("outputs").empty()) bad.push_back("manifest lists no outputs");
  for (const auto& out : j.at("outputs")) {
    fs::path p = dir / out.at("path").get<std::string>();
    if (!fs::exists(p)) {
      bad.push_back(fmt::format("missing listed output {}", p.string()));
      continue;
    }
    if (chantop::pipeline::sha256_file(p) !=
        out.at("sha256").get<std::string>())
      bad.push_back(fmt::format("digest mismatch for {}",
                                out.at("path").get<std::string>()));
  }
  for (const auto& in : j.at("inputs"))
    if (chantop::pipeline::sha256_file(in.at("path").get<std::string>()) !=
        in.at("sha256").get<std::string>())
      bad.push_back("input digest mismatch");
  return bad;
}

std::vector<std::string> check_sample(const fs::path& work) {
  std::vector<std::string> bad;
  fs::path data = CHANTOP_DATA_DIR;
  fs::path csv = data / "sample_librariesio_500.csv";
  fs::path cfg = data / "librariesio_schema.cfg";
  if (!fs::exists(csv) || !fs::exists(cfg)) {
    bad.push_back("bundled sample or its schema file is missing");
    return bad;
  }

  fs::path topo = work / "sample-topology";
  fs::path log = work / "sample.log";
  int rc = run_cli(
      fmt::format("topology --input \"{}\" --schema \"{}\" --out \"{}\"",
                  csv.string(), cfg.string(), topo.string()),
      log);
  if (rc != 0)
    bad.push_back(fmt::format("topology exited {}: {}", rc, log_excerpt(log)));
  else
    for (auto& b : check_manifest(topo, "topology")) bad.push_back(b);

  fs::path base = work / "sample-pca";
  rc = run_cli(
      fmt::format("pca-baseline --input \"{}\" --schema \"{}\" --out \"{}\"",
                  csv.string(), cfg.string(), base.string()),
      log);
  if (rc != 0)
    bad.push_back(fmt::format("pca-baseline exited {}: {}", rc,
                              log_excerpt(log)));
  else
    for (auto& b : check_manifest(base, "pca-baseline")) bad.push_back(b);
  return bad;
}

// ------------------------------------------------------------------- harness

int run_criterion(int index, const char* label, double budget_seconds,
                  const std::function<std::vector<std::string>()>& body) {
  auto start = std::chrono::steady_clock::now();
  std::vector<std::string> failures;
  try {
    failures = body();
  } catch (const std::exception& e) {
    failures.push_back(fmt::format("unhandled exception: {}", e.what()));
  }
  double seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  if (budget_seconds > 0.0 && seconds >= budget_seconds)
    failures.push_back(fmt::format("runtime {:.2f}s exceeds the {:.0f}s budget",
                                   seconds, budget_seconds));
  if (failures.empty()) {
    fmt::print("PASS criterion-{} {} ({:.2f}s)\n", index, label, seconds);
    return 0;
  }
  std::string joined;
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (i > 0) joined += "; ";
    joined += failures[i];
  }
  fmt::print("FAIL criterion-{} {} ({:.2f}s): {}\n", index, label, seconds,
             joined);
  return 1;
}

}  // namespace

int main() {
  fs::path work = fs::temp_directory_path() /
                  fmt::format("chantop-acceptance-{}", ::getpid());
  fs::create_directories(work);

  int failed = 0;
  failed += run_criterion(1, "channel registry table", 1.0,
                          [] { return check_registry_table(); });
  failed += run_criterion(2, "feature normalization", 5.0,
                          [&] { return check_normalization(work); });
  failed += run_criterion(3, "affinity calibration", 0.0,
                          [] { return check_affinities(); });
  failed += run_criterion(4, "embedding gradient and objective", 30.0,
                          [] { return check_gradient(); });
  failed += run_criterion(5, "linear baseline against the eigen oracle", 0.0,
                          [] { return check_pca(); });
  failed += run_criterion(6, "nerve construction against the pairwise oracle",
                          0.0, [] { return check_nerve(); });
  failed += run_criterion(7, "planted cluster recovery", 300.0,
                          [&] { return check_recovery(work); });
  failed += run_criterion(8, "trend and popularity reports", 0.0,
                          [&] { return check_trends(work); });
  failed += run_criterion(9, "manifest replay determinism", 0.0,
                          [&] { return check_replay(work); });
  failed += run_criterion(10, "bundled sample end-to-end", 120.0,
                          [&] { return check_sample(work); });

  std::error_code ec;
  fs::remove_all(work, ec);
  if (failed == 0)
    fmt::print("all 10 criteria passed\n");
  else
    fmt::print("{} of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
