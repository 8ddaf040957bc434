#include "chantop/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <fmt/format.h>

#include "chantop/rng.hpp"

namespace chantop::fixture {
namespace {

const std::vector<std::string>& columns() {
  static const std::vector<std::string> cols{
      "ID",
      "Platform",
      "Name",
      "Created Timestamp",
      "Updated Timestamp",
      "Description",
      "Keywords",
      "Homepage URL",
      "Repository Stars Count",
      "Repository Forks Count",
      "Repository Open Issues Count",
      "Repository Issues enabled?",
      "Repository Wiki enabled?",
      "Repository Pages enabled?",
      "Repository Fork?",
      "Repository License",
      "Repository Readme filename",
      "Repository Changelog filename",
      "Repository Contributing guidelines filename",
      "Repository Code of Conduct filename",
      "Repository Security Threat Model filename",
      "Repository Security Audit filename",
  };
  return cols;
}

const char* kAdjectives[] = {"amber",  "brisk",  "calm",   "dapper", "eager",
                             "fluent", "gentle", "hazy",   "ionic",  "jolly",
                             "keen",   "lucid",  "mellow", "nimble", "opal",
                             "prime",  "quiet",  "rapid",  "solid",  "tidy",
                             "urban",  "vivid",  "warm",   "zesty"};
const char* kNouns[] = {"anchor", "beacon", "cipher", "delta",  "ember",
                        "falcon", "grove",  "harbor", "island", "jigsaw",
                        "kernel", "lantern", "meadow", "nexus",  "orbit",
                        "pixel",  "quartz", "river",  "summit", "tunnel",
                        "vector", "willow", "yarn",   "zephyr"};
const char* kLicenses[] = {"MIT", "Apache-2.0", "BSD-3-Clause", "GPL-3.0",
                           "ISC"};
const char* kDescriptions[] = {
    "Utilities for everyday development tasks",
    "A small library with a focused API",
    "Framework glue and integration helpers",
    "Command line tooling for build pipelines",
    "Data structures tuned for streaming workloads",
    "",
};

double presence_for(const ProfileSpec& profile, const std::string& channel,
                    int year) {
  double p = profile.default_presence;
  if (auto it = profile.presence.find(channel); it != profile.presence.end())
    p = it->second;
  if (auto yit = profile.presence_by_year.find(year);
      yit != profile.presence_by_year.end())
    if (auto it = yit->second.find(channel); it != yit->second.end())
      p = it->second;
  return p;
}

// Planted populations are profile-pure: flags exact (probability 1 or 0)
// and counts fixed. Any per-project jitter in the feature channels splits
// off its own cluster and changes the component count; scatter lives in the
// star counts instead, which never enter the feature matrix.
ProfileSpec blob(std::string label, std::vector<std::string> high,
                 double forks, double issues, std::int64_t star_lo,
                 std::int64_t star_hi) {
  ProfileSpec p;
  p.label = std::move(label);
  p.default_presence = 0.0;
  for (auto& ch : high) p.presence[std::move(ch)] = 1.0;
  p.count_mean["# of Forks"] = forks;
  p.count_mean["# of Open Issues"] = issues;
  p.exact_counts = true;
  p.stars_lo = star_lo;
  p.stars_hi = star_hi;
  return p;
}

}  // namespace

FixtureSpec preset(const std::string& name, std::uint64_t seed,
                   std::size_t projects) {
  FixtureSpec spec;
  spec.seed = seed;
  spec.projects = projects;
  if (name == "blobs3") {
    spec.profiles = {
        blob("A", {"GitHub Pages", "Readme", "Wiki", "Issue Tracker", "License"},
             45.0, 5.0, 10, 3000),
        blob("B",
             {"Changelog", "Code of Conduct", "Contributing Guidelines",
              "License", "Fork"},
             4.0, 45.0, 10, 3000),
        blob("C",
             {"Security Audit", "Security Threat Model", "Issue Tracker",
              "Fork"},
             4.0, 4.0, 10, 3000),
    };
    return spec;
  }
  if (name == "decline") {
    ProfileSpec p;
    p.label = "D";
    p.default_presence = 0.0;
    p.presence = {{"Readme", 1.0},
                  {"Wiki", 1.0},
                  {"Issue Tracker", 1.0},
                  {"License", 1.0}};
    p.presence_by_year = {{2015, {{"Contributing Guidelines", 0.72}}},
                          {2016, {{"Contributing Guidelines", 0.55}}},
                          {2017, {{"Contributing Guidelines", 0.06}}}};
    p.count_mean = {{"# of Forks", 10.0}, {"# of Open Issues", 12.0}};
    p.exact_counts = true;
    p.stars_lo = 10;
    p.stars_hi = 4000;
    spec.profiles = {p};
    return spec;
  }
  if (name == "popularity") {
    spec.profiles = {
        blob("P", {"GitHub Pages", "Readme", "Wiki", "Issue Tracker", "License"},
             60.0, 20.0, 5000, 20000),
        blob("Q",
             {"Changelog", "Code of Conduct", "Contributing Guidelines",
              "License", "Fork"},
             8.0, 30.0, 100, 900),
        blob("R",
             {"Security Audit", "Security Threat Model", "Issue Tracker",
              "Fork"},
             3.0, 5.0, 10, 90),
    };
    return spec;
  }
  if (name == "uniform") {
    spec.ecosystems = {"npm", "PyPI", "Go"};
    ProfileSpec p;
    p.label = "U";
    p.default_presence = 0.5;
    p.count_mean = {{"# of Forks", 10.0}, {"# of Open Issues", 10.0}};
    p.stars_lo = 10;
    p.stars_hi = 5000;
    spec.profiles = {p};
    return spec;
  }
  if (name == "sample") {
    spec.ecosystems = {"npm",  "Go",    "Packagist", "PyPI",
                       "Maven", "NuGet", "Rubygems"};
    spec.years = {2013, 2014, 2015, 2016, 2017};
    ProfileSpec docs;
    docs.label = "docs";
    docs.default_presence = 0.2;
    docs.presence = {{"Readme", 0.98},
                     {"Wiki", 0.7},
                     {"GitHub Pages", 0.6},
                     {"Contributing Guidelines", 0.75},
                     {"Code of Conduct", 0.5},
                     {"Changelog", 0.65},
                     {"License", 0.95},
                     {"Issue Tracker", 0.9}};
    docs.count_mean = {{"# of Forks", 25.0}, {"# of Open Issues", 18.0}};
    docs.stars_lo = 600;
    docs.stars_hi = 30000;
    ProfileSpec code;
    code.label = "code";
    code.default_presence = 0.15;
    code.presence = {{"Readme", 0.9},
                     {"Fork", 0.6},
                     {"Issue Tracker", 0.85},
                     {"License", 0.8},
                     {"Changelog", 0.3}};
    code.count_mean = {{"# of Forks", 12.0}, {"# of Open Issues", 22.0}};
    code.stars_lo = 150;
    code.stars_hi = 9000;
    ProfileSpec bare;
    bare.label = "bare";
    bare.default_presence = 0.06;
    bare.presence = {{"Readme", 0.75}, {"License", 0.4}};
    bare.count_mean = {{"# of Forks", 2.0}, {"# of Open Issues", 3.0}};
    bare.stars_lo = 50;
    bare.stars_hi = 1200;
    spec.profiles = {docs, code, bare};
    return spec;
  }
  throw std::invalid_argument("unknown fixture preset: " + name);
}

std::vector<std::string> preset_names() {
  return {"blobs3", "decline", "popularity", "uniform", "sample"};
}

ingest::Schema fixture_schema() {
  ingest::Schema s;
  s.id_col = "ID";
  s.ecosystem_col = "Platform";
  s.name_col = "Name";
  s.created_col = "Created Timestamp";
  s.stars_col = "Repository Stars Count";
  s.channel_cols = {
      {"GitHub Pages", "Repository Pages enabled?"},
      {"Readme", "Repository Readme filename"},
      {"Security Audit", "Repository Security Audit filename"},
      {"Wiki", "Repository Wiki enabled?"},
      {"Changelog", "Repository Changelog filename"},
      {"Code of Conduct", "Repository Code of Conduct filename"},
      {"Contributing Guidelines",
       "Repository Contributing guidelines filename"},
      {"Fork", "Repository Fork?"},
      {"Issue Tracker", "Repository Issues enabled?"},
      {"License", "Repository License"},
      {"Security Threat Model", "Repository Security Threat Model filename"},
      {"# of Forks", "Repository Forks Count"},
      {"# of Open Issues", "Repository Open Issues Count"},
  };
  return s;
}

void write_fixture(const FixtureSpec& spec,
                   const std::filesystem::path& csv_file) {
  if (spec.profiles.empty())
    throw std::invalid_argument("fixture needs at least one profile");
  if (spec.ecosystems.empty() || spec.years.empty())
    throw std::invalid_argument("fixture needs ecosystems and years");

  double total_weight = 0.0;
  for (const auto& p : spec.profiles) total_weight += p.weight;

  std::ofstream out(csv_file, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write fixture: " + csv_file.string());
  ingest::write_delimited_row(out, columns(), ',');

  Rng rng(spec.seed);
  for (std::size_t i = 0; i < spec.projects; ++i) {
    double pick = rng.uniform() * total_weight;
    const ProfileSpec* profile = &spec.profiles.back();
    for (const auto& p : spec.profiles) {
      if (pick < p.weight) {
        profile = &p;
        break;
      }
      pick -= p.weight;
    }

    const std::string& eco =
        spec.ecosystems[static_cast<std::size_t>(rng.uniform_int(
            0, static_cast<std::int64_t>(spec.ecosystems.size()) - 1))];
    int year = spec.years[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(spec.years.size()) - 1))];
    int month = static_cast<int>(rng.uniform_int(1, 12));
    int day = static_cast<int>(rng.uniform_int(1, 28));
    std::int64_t stars = rng.uniform_int(profile->stars_lo, profile->stars_hi);

    auto present = [&](const char* channel) {
      return rng.bernoulli(presence_for(*profile, channel, year));
    };
    auto count_of = [&](const char* channel) {
      double mean = 6.0;
      if (auto it = profile->count_mean.find(channel);
          it != profile->count_mean.end())
        mean = it->second;
      if (profile->exact_counts)
        return static_cast<std::int64_t>(std::llround(mean));
      return rng.poisson(mean);
    };

    // Channel draws happen in one fixed order so streams stay reproducible.
    bool pages = present("GitHub Pages");
    bool readme = present("Readme");
    bool audit = present("Security Audit");
    bool wiki = present("Wiki");
    bool changelog = present("Changelog");
    bool conduct = present("Code of Conduct");
    bool contributing = present("Contributing Guidelines");
    bool fork = present("Fork");
    bool issues = present("Issue Tracker");
    bool license = present("License");
    bool threat = present("Security Threat Model");
    std::int64_t forks = count_of("# of Forks");
    std::int64_t open_issues = count_of("# of Open Issues");

    std::string name = fmt::format(
        "{}-{}-{}",
        kAdjectives[rng.uniform_int(0, std::size(kAdjectives) - 1)],
        kNouns[rng.uniform_int(0, std::size(kNouns) - 1)], i % 97);
    const char* description =
        kDescriptions[rng.uniform_int(0, std::size(kDescriptions) - 1)];
    const char* lic = kLicenses[rng.uniform_int(0, std::size(kLicenses) - 1)];
    int upd_month = static_cast<int>(rng.uniform_int(1, 12));
    int upd_day = static_cast<int>(rng.uniform_int(1, 28));
    bool homepage = rng.bernoulli(0.4);

    std::vector<std::string> cells{
        fmt::format("{}-{:06}", profile->label, i + 1),
        eco,
        name,
        fmt::format("{}-{:02}-{:02} {:02}:{:02}:00 UTC", year, month, day,
                    rng.uniform_int(0, 23), rng.uniform_int(0, 59)),
        fmt::format("{}-{:02}-{:02} 09:30:00 UTC",
                    std::min(year + 1, 2018), upd_month, upd_day),
        description,
        "library,tools",
        homepage ? fmt::format("https://example.org/{}", name)
                 : std::string{},
        std::to_string(stars),
        std::to_string(forks),
        std::to_string(open_issues),
        issues ? "true" : "false",
        wiki ? "true" : "false",
        pages ? "true" : "false",
        fork ? "true" : "false",
        license ? lic : "",
        readme ? "README.md" : "",
        changelog ? "CHANGELOG.md" : "",
        contributing ? "CONTRIBUTING.md" : "",
        conduct ? "CODE_OF_CONDUCT.md" : "",
        threat ? "THREAT_MODEL.md" : "",
        audit ? "SECURITY_AUDIT.md" : "",
    };
    ingest::write_delimited_row(out, cells, ',');
  }
}

}  // namespace chantop::fixture
