#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "chantop/ingest.hpp"

namespace chantop::fixture {

// One synthetic population of projects sharing a channel-usage profile.
struct ProfileSpec {
  std::string label;
  double weight = 1.0;
  // Probability that a flag/text channel is present, per channel name;
  // unlisted channels fall back to default_presence.
  std::map<std::string, double> presence;
  double default_presence = 0.05;
  // Mean of the count channels (Poisson), or the exact value when
  // exact_counts is set. Planted-structure presets use exact values: count
  // jitter would split clusters along the integer lattice.
  std::map<std::string, double> count_mean;
  bool exact_counts = false;
  std::int64_t stars_lo = 10;
  std::int64_t stars_hi = 2000;
  // Presence overrides keyed by creation year, applied on top of presence.
  std::map<int, std::map<std::string, double>> presence_by_year;
};

struct FixtureSpec {
  std::uint64_t seed = 7;
  std::size_t projects = 1000;
  std::vector<std::string> ecosystems{"npm"};
  std::vector<int> years{2015, 2016, 2017};
  std::vector<ProfileSpec> profiles;
};

// Named generator presets exposed by the command line:
//   blobs3     three well-separated channel profiles
//   decline    one channel fading away year over year
//   popularity three profiles with distinct star ranges
//   uniform    a single mixed population
//   sample     multi-ecosystem mix in a raw export layout
FixtureSpec preset(const std::string& name, std::uint64_t seed,
                   std::size_t projects);
std::vector<std::string> preset_names();

// Writes a CSV shaped like a libraries.io project export (the layout the
// bundled schema file describes) plus filler columns real exports carry.
void write_fixture(const FixtureSpec& spec,
                   const std::filesystem::path& csv_file);

// The schema describing that layout.
ingest::Schema fixture_schema();

}  // namespace chantop::fixture
