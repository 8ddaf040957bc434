#include "chantop/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace chantop::ingest {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool parse_int(std::string_view s, std::int64_t* out) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  std::int64_t v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  *out = v;
  return true;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return d[m - 1];
}

RawValue parse_cell(const std::string& raw, knowledge::ValueKind kind) {
  std::string t = trim(raw);
  if (t.empty()) return RawValue::absent();
  switch (kind) {
    case knowledge::ValueKind::Count: {
      std::int64_t v = 0;
      if (parse_int(t, &v)) return RawValue::of_count(v);
      return RawValue::absent();
    }
    case knowledge::ValueKind::Flag: {
      std::string l = lower(t);
      if (l == "true" || l == "t" || l == "1" || l == "yes")
        return RawValue::of_flag(true);
      if (l == "false" || l == "f" || l == "0" || l == "no")
        return RawValue::of_flag(false);
      // Any other non-empty cell (e.g. a file name) proves the channel exists.
      return RawValue::of_flag(true);
    }
    case knowledge::ValueKind::Text:
      return RawValue::of_text(raw);
  }
  return RawValue::absent();
}

std::string render_cell(const RawValue& v) {
  switch (v.kind) {
    case RawValue::Kind::Absent: return {};
    case RawValue::Kind::Count: return std::to_string(v.count);
    case RawValue::Kind::Flag: return v.flag ? "true" : "false";
    case RawValue::Kind::Text: return v.text;
  }
  return {};
}

void sort_records(std::vector<ProjectRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const ProjectRecord& a, const ProjectRecord& b) {
                     if (a.stars != b.stars) return a.stars > b.stars;
                     return a.id < b.id;
                   });
}

std::size_t require_column(const std::map<std::string, std::size_t>& index,
                           const std::string& header, const char* role) {
  auto it = index.find(header);
  if (it == index.end())
    throw std::runtime_error(std::string("missing ") + role + " column '" +
                             header + "' in input header");
  return it->second;
}

}  // namespace

Date parse_date(std::string_view text) {
  auto fail = [&] {
    throw std::invalid_argument("bad date: " + std::string(text));
  };
  std::string t = trim(text);
  if (t.size() < 10) fail();
  auto digits = [&](std::size_t at, std::size_t len) {
    int v = 0;
    for (std::size_t i = at; i < at + len; ++i) {
      if (t[i] < '0' || t[i] > '9') fail();
      v = v * 10 + (t[i] - '0');
    }
    return v;
  };
  if (t[4] != '-' || t[7] != '-') fail();
  Date d{digits(0, 4), digits(5, 2), digits(8, 2)};
  if (d.year < 1 || d.month < 1 || d.month > 12) fail();
  if (d.day < 1 || d.day > days_in_month(d.year, d.month)) fail();
  if (t.size() > 10 && t[10] != ' ' && t[10] != 'T') fail();
  return d;
}

std::string to_string(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

std::vector<std::vector<std::string>> read_delimited(std::istream& in,
                                                     char delimiter) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool in_quotes = false;
  bool cell_started = false;
  char c;
  auto end_cell = [&] {
    row.push_back(std::move(cell));
    cell.clear();
    cell_started = false;
  };
  auto end_row = [&] {
    end_cell();
    if (row.size() > 1 || !row[0].empty()) rows.push_back(std::move(row));
    row.clear();
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"' && !cell_started && cell.empty()) {
      in_quotes = true;
      cell_started = true;
    } else if (c == delimiter) {
      end_cell();
    } else if (c == '\n') {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      end_row();
    } else {
      cell.push_back(c);
      cell_started = true;
    }
  }
  if (in_quotes) throw std::runtime_error("unterminated quoted field");
  if (cell_started || !cell.empty() || !row.empty()) end_row();
  return rows;
}

void write_delimited_row(std::ostream& out,
                         const std::vector<std::string>& cells,
                         char delimiter) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << delimiter;
    const std::string& c = cells[i];
    bool needs_quotes = c.find_first_of("\"\r\n") != std::string::npos ||
                        c.find(delimiter) != std::string::npos;
    if (!needs_quotes) {
      out << c;
      continue;
    }
    out << '"';
    for (char ch : c) {
      if (ch == '"') out << '"';
      out << ch;
    }
    out << '"';
  }
  out << '\n';
}

Schema Schema::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open schema file: " + file.string());
  Schema s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) +
                               ": expected key=column");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key == "id") s.id_col = value;
    else if (key == "ecosystem") s.ecosystem_col = value;
    else if (key == "name") s.name_col = value;
    else if (key == "created") s.created_col = value;
    else if (key == "stars") s.stars_col = value;
    else if (key == "delimiter") s.delimiter = (value == "tab") ? '\t' : value.at(0);
    else if (key.starts_with("channel.")) s.channel_cols.emplace_back(key.substr(8), value);
    else
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) +
                               ": unknown schema key '" + key + "'");
  }
  for (const auto& [role, col] :
       {std::pair<const char*, const std::string*>{"id", &s.id_col},
        {"ecosystem", &s.ecosystem_col},
        {"name", &s.name_col},
        {"created", &s.created_col},
        {"stars", &s.stars_col}})
    if (col->empty())
      throw std::runtime_error(file.string() + ": schema lacks a '" +
                               std::string(role) + "' mapping");
  return s;
}

void Schema::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write schema file: " + file.string());
  if (delimiter != ',')
    out << "delimiter=" << (delimiter == '\t' ? std::string("tab")
                                              : std::string(1, delimiter))
        << '\n';
  out << "id=" << id_col << '\n';
  out << "ecosystem=" << ecosystem_col << '\n';
  out << "name=" << name_col << '\n';
  out << "created=" << created_col << '\n';
  out << "stars=" << stars_col << '\n';
  for (const auto& [channel, col] : channel_cols)
    out << "channel." << channel << '=' << col << '\n';
}

ProjectTable load_projects(const std::filesystem::path& csv_file,
                           const Schema& schema,
                           const knowledge::ChannelRegistry& registry,
                           LoadStats* stats) {
  std::ifstream in(csv_file, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open input file: " + csv_file.string());
  auto rows = read_delimited(in, schema.delimiter);
  if (rows.empty()) throw std::runtime_error("empty input: " + csv_file.string());

  std::map<std::string, std::size_t> header_index;
  for (std::size_t i = 0; i < rows[0].size(); ++i)
    header_index.emplace(rows[0][i], i);

  const std::size_t id_at = require_column(header_index, schema.id_col, "id");
  const std::size_t eco_at =
      require_column(header_index, schema.ecosystem_col, "ecosystem");
  const std::size_t name_at =
      require_column(header_index, schema.name_col, "name");
  const std::size_t created_at =
      require_column(header_index, schema.created_col, "created");
  const std::size_t stars_at =
      require_column(header_index, schema.stars_col, "stars");

  struct ChannelCol {
    const knowledge::ChannelDescriptor* descriptor;
    std::size_t at;
  };
  std::vector<ChannelCol> channel_cols;
  for (const auto& [channel, col] : schema.channel_cols) {
    const auto* desc = registry.find(channel);
    if (desc == nullptr)
      throw std::runtime_error("schema maps unregistered channel '" + channel +
                               "'");
    channel_cols.push_back(
        {desc, require_column(header_index, col, "channel")});
  }

  LoadStats local;
  std::set<std::string> seen_ids;
  ProjectTable table;
  table.provenance.source = csv_file.string();
  const std::size_t width = rows[0].size();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    ++local.rows_read;
    const auto& cells = rows[r];
    auto reject = [&] { ++local.rows_rejected; };
    if (cells.size() != width) {
      reject();
      continue;
    }
    ProjectRecord rec;
    rec.id = trim(cells[id_at]);
    if (rec.id.empty() || !seen_ids.insert(rec.id).second) {
      reject();
      continue;
    }
    if (!parse_int(trim(cells[stars_at]), &rec.stars)) {
      seen_ids.erase(rec.id);
      reject();
      continue;
    }
    try {
      rec.created = parse_date(cells[created_at]);
    } catch (const std::invalid_argument&) {
      seen_ids.erase(rec.id);
      reject();
      continue;
    }
    rec.ecosystem = trim(cells[eco_at]);
    rec.name = trim(cells[name_at]);
    for (const auto& c : registry)
      rec.channel_values.emplace(c.name, RawValue::absent());
    for (const auto& cc : channel_cols)
      rec.channel_values[cc.descriptor->name] =
          parse_cell(cells[cc.at], cc.descriptor->value_kind);
    table.records.push_back(std::move(rec));
  }
  sort_records(table.records);
  if (stats != nullptr) *stats = local;
  return table;
}

void save_projects(const ProjectTable& table, const Schema& schema,
                   const std::filesystem::path& csv_file) {
  std::ofstream out(csv_file, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write output file: " + csv_file.string());
  std::vector<std::string> header{schema.id_col, schema.ecosystem_col,
                                  schema.name_col, schema.created_col,
                                  schema.stars_col};
  for (const auto& [channel, col] : schema.channel_cols)
    header.push_back(col);
  write_delimited_row(out, header, schema.delimiter);
  for (const auto& rec : table.records) {
    std::vector<std::string> cells{rec.id, rec.ecosystem, rec.name,
                                   to_string(rec.created),
                                   std::to_string(rec.stars)};
    for (const auto& [channel, col] : schema.channel_cols) {
      auto it = rec.channel_values.find(channel);
      cells.push_back(it == rec.channel_values.end() ? std::string{}
                                                     : render_cell(it->second));
    }
    write_delimited_row(out, cells, schema.delimiter);
  }
}

ProjectTable top_n_by_stars(const ProjectTable& table, std::size_t n) {
  if (n == 0) throw std::invalid_argument("top_n_by_stars: n must be positive");
  ProjectTable out;
  out.provenance = table.provenance;
  out.provenance.filters.push_back("top_n=" + std::to_string(n));
  std::size_t take = std::min(n, table.records.size());
  out.records.assign(table.records.begin(), table.records.begin() + take);
  return out;
}

ProjectTable slice_by_year(const ProjectTable& table, int year) {
  ProjectTable out;
  out.provenance = table.provenance;
  out.provenance.filters.push_back("year=" + std::to_string(year));
  for (const auto& rec : table.records)
    if (rec.created.year == year) out.records.push_back(rec);
  return out;
}

ProjectTable slice_by_ecosystem(const ProjectTable& table,
                                const std::string& ecosystem) {
  ProjectTable out;
  out.provenance = table.provenance;
  out.provenance.filters.push_back("ecosystem=" + ecosystem);
  for (const auto& rec : table.records)
    if (rec.ecosystem == ecosystem) out.records.push_back(rec);
  return out;
}

std::map<std::string, StarStats> summary_stats(const ProjectTable& table) {
  std::map<std::string, std::vector<std::int64_t>> stars;
  for (const auto& rec : table.records)
    stars[rec.ecosystem].push_back(rec.stars);
  std::map<std::string, StarStats> out;
  for (auto& [eco, values] : stars) {
    std::sort(values.begin(), values.end());
    StarStats s;
    s.count = values.size();
    s.min = values.front();
    s.max = values.back();
    s.median = values[(values.size() - 1) / 2];
    s.mean = static_cast<double>(std::accumulate(values.begin(), values.end(),
                                                 std::int64_t{0})) /
             static_cast<double>(values.size());
    out.emplace(eco, s);
  }
  return out;
}

}  // namespace chantop::ingest
