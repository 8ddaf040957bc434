#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "chantop/knowledge.hpp"

namespace chantop::ingest {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  auto operator<=>(const Date&) const = default;
};

// Parses "YYYY-MM-DD" with an optional time-of-day / zone suffix such as
// "2015-03-01 04:05:06 UTC" or "2015-03-01T04:05:06Z". Throws on malformed
// or impossible calendar dates.
Date parse_date(std::string_view text);
std::string to_string(const Date& d);

// One raw export cell, typed by the channel it belongs to.
struct RawValue {
  enum class Kind { Absent, Count, Flag, Text };

  Kind kind = Kind::Absent;
  std::int64_t count = 0;
  bool flag = false;
  std::string text;

  static RawValue absent() { return {}; }
  static RawValue of_count(std::int64_t v) {
    return {Kind::Count, v, false, {}};
  }
  static RawValue of_flag(bool v) { return {Kind::Flag, 0, v, {}}; }
  static RawValue of_text(std::string v) {
    return {Kind::Text, 0, false, std::move(v)};
  }

  bool operator==(const RawValue&) const = default;
};

struct ProjectRecord {
  std::string id;
  std::string ecosystem;
  std::string name;
  Date created;
  std::int64_t stars = 0;
  // One entry per registered channel; channels missing from the source file
  // carry an absent marker.
  std::map<std::string, RawValue> channel_values;

  bool operator==(const ProjectRecord&) const = default;
};

struct Provenance {
  std::string source;
  std::vector<std::string> filters;

  bool operator==(const Provenance&) const = default;
};

// Records are kept sorted by stars descending, ties broken by id ascending.
struct ProjectTable {
  std::vector<ProjectRecord> records;
  Provenance provenance;

  std::size_t size() const { return records.size(); }
};

// Column assignments that adapt one tabular export layout to the loader.
// Stored as "key=column header" lines; keys are id, ecosystem, name,
// created, stars, delimiter (optional, "," default, "tab" accepted) and
// channel.<registered channel name>.
struct Schema {
  std::string id_col;
  std::string ecosystem_col;
  std::string name_col;
  std::string created_col;
  std::string stars_col;
  std::vector<std::pair<std::string, std::string>> channel_cols;
  char delimiter = ',';

  static Schema load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
};

struct LoadStats {
  std::size_t rows_read = 0;
  std::size_t rows_rejected = 0;
};

// Missing schema columns raise std::runtime_error naming the column. Rows
// with negative/unparseable stars, malformed dates, empty or duplicate ids
// are rejected and counted, never silently dropped.
ProjectTable load_projects(const std::filesystem::path& csv_file,
                           const Schema& schema,
                           const knowledge::ChannelRegistry& registry,
                           LoadStats* stats = nullptr);

// Writes the table back in the schema's layout; loading the result yields
// records equal to the input.
void save_projects(const ProjectTable& table, const Schema& schema,
                   const std::filesystem::path& csv_file);

// First n records of the star ordering (all records if fewer). n == 0 throws.
ProjectTable top_n_by_stars(const ProjectTable& table, std::size_t n);

ProjectTable slice_by_year(const ProjectTable& table, int year);
ProjectTable slice_by_ecosystem(const ProjectTable& table,
                                const std::string& ecosystem);

struct StarStats {
  std::size_t count = 0;
  std::int64_t min = 0;
  std::int64_t max = 0;
  std::int64_t median = 0;  // lower middle for even-sized groups
  double mean = 0.0;
};

// Per-ecosystem star statistics; ecosystems without records are omitted.
std::map<std::string, StarStats> summary_stats(const ProjectTable& table);

// Minimal RFC 4180-style reader: quoted fields, embedded delimiters,
// quotes and newlines. Returns one vector of cells per record.
std::vector<std::vector<std::string>> read_delimited(std::istream& in,
                                                     char delimiter);
void write_delimited_row(std::ostream& out,
                         const std::vector<std::string>& cells,
                         char delimiter);

}  // namespace chantop::ingest
