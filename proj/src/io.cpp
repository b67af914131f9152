#include "decc/io.hpp"

#include "decc/log.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace decc::io {

ParseError::ParseError(std::string source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message),
      source_(std::move(source)),
      line_(line) {}

std::string format_number(double value) {
  if (std::isnan(value)) return "";
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

/// Line reader that skips blank lines and tracks 1-based line numbers.
class CsvReader {
public:
  CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (trim(line).empty()) continue;
      fields = split(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(source_, line_no_, message);
  }

  double number(const std::string& field, const std::string& column) const {
    const char* begin = field.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (field.empty() || end != begin + field.size() || errno == ERANGE) {
      fail("column '" + column + "': '" + field + "' is not a number");
    }
    return v;
  }

  int integer(const std::string& field, const std::string& column) const {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
      fail("column '" + column + "': '" + field + "' is not an integer");
    }
    return v;
  }

  Date date(const std::string& field) const {
    try {
      return Date::parse(field);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_no_; }

private:
  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

void expect_prefix(const CsvReader& reader, const std::vector<std::string>& header,
                   const std::vector<std::string>& expected) {
  if (header.size() < expected.size()) reader.fail("header too short");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (header[i] != expected[i]) {
      reader.fail("header column " + std::to_string(i + 1) + " is '" + header[i] +
                  "', expected '" + expected[i] + "'");
    }
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

using Key = std::pair<std::string, Date>;

}  // namespace

std::vector<EnsembleForecast> read_forecasts(std::istream& in, const std::string& source) {
  CsvReader reader(in, source);
  std::vector<std::string> header;
  if (!reader.next(header)) reader.fail("empty forecast file");
  expect_prefix(reader, header, {"date", "station", "lead_time"});
  const std::size_t members = header.size() - 3;
  if (members < 2) reader.fail("forecast file needs at least two member columns");
  for (std::size_t i = 3; i < header.size(); ++i) {
    if (header[i].empty() || header[i][0] != 'm') {
      reader.fail("member column '" + header[i] + "' should be named mNN");
    }
  }

  std::map<Key, std::map<int, Eigen::VectorXd>> groups;
  std::set<int> grid;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != header.size()) {
      reader.fail("expected " + std::to_string(header.size()) + " fields, found " +
                  std::to_string(fields.size()));
    }
    const Date date = reader.date(fields[0]);
    const std::string& station = fields[1];
    if (station.empty()) reader.fail("empty station id");
    const int lead = reader.integer(fields[2], "lead_time");
    Eigen::VectorXd row(static_cast<Index>(members));
    for (std::size_t i = 0; i < members; ++i) {
      const double v = reader.number(fields[i + 3], header[i + 3]);
      if (!std::isfinite(v) || v < 0.0) {
        reader.fail("column '" + header[i + 3] + "': invalid wind speed " + fields[i + 3]);
      }
      row(static_cast<Index>(i)) = v;
    }
    auto& group = groups[{station, date}];
    if (!group.emplace(lead, std::move(row)).second) {
      reader.fail("duplicate row for (" + date.iso() + ", " + station + ", lead " +
                  std::to_string(lead) + ")");
    }
    grid.insert(lead);
  }

  const std::vector<int> leads(grid.begin(), grid.end());
  std::vector<EnsembleForecast> out;
  for (auto& [key, rows] : groups) {
    if (rows.size() != leads.size()) {
      std::string missing;
      for (int lead : leads) {
        if (rows.count(lead) == 0) missing += (missing.empty() ? "" : ",") + std::to_string(lead);
      }
      log::warn(source + ": forecast " + key.first + " " + key.second.iso() +
                " lacks lead time(s) " + missing + "; dropped");
      continue;
    }
    Eigen::MatrixXd m(static_cast<Index>(leads.size()), static_cast<Index>(members));
    Index t = 0;
    for (auto& [lead, row] : rows) m.row(t++) = row.transpose();
    out.emplace_back(key.second, key.first, leads, std::move(m));
  }
  return out;
}

std::vector<EnsembleForecast> read_forecasts(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_forecasts(in, path.string());
}

void write_forecasts(std::ostream& out, const std::vector<EnsembleForecast>& forecasts) {
  if (forecasts.empty()) return;
  const Index members = forecasts.front().member_count();
  out << "date,station,lead_time";
  char name[24];
  for (Index i = 1; i <= members; ++i) {
    std::snprintf(name, sizeof name, "m%02ld", static_cast<long>(i));
    out << ',' << name;
  }
  out << '\n';
  for (const auto& f : forecasts) {
    if (f.member_count() != members) {
      throw std::invalid_argument("forecasts with different ensemble sizes in one file");
    }
    for (Index t = 0; t < f.lead_count(); ++t) {
      out << f.run_date().iso() << ',' << f.station_id() << ','
          << f.lead_times()[static_cast<std::size_t>(t)];
      for (Index i = 0; i < members; ++i) out << ',' << format_number(f.members()(t, i));
      out << '\n';
    }
  }
}

std::vector<ObservationSeries> read_observations(std::istream& in, const std::string& source) {
  CsvReader reader(in, source);
  std::vector<std::string> header;
  if (!reader.next(header)) reader.fail("empty observation file");
  expect_prefix(reader, header, {"date", "station", "lead_time", "obs"});
  if (header.size() != 4) reader.fail("observation file must have exactly 4 columns");

  std::map<Key, std::map<int, double>> groups;
  std::set<int> grid;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != 4) {
      reader.fail("expected 4 fields, found " + std::to_string(fields.size()));
    }
    const Date date = reader.date(fields[0]);
    if (fields[1].empty()) reader.fail("empty station id");
    const int lead = reader.integer(fields[2], "lead_time");
    double v = std::numeric_limits<double>::quiet_NaN();
    if (!fields[3].empty()) {
      v = reader.number(fields[3], "obs");
      if (!std::isfinite(v) || v < 0.0) reader.fail("column 'obs': invalid wind speed " + fields[3]);
    }
    if (!groups[{fields[1], date}].emplace(lead, v).second) {
      reader.fail("duplicate observation for (" + date.iso() + ", " + fields[1] + ", lead " +
                  std::to_string(lead) + ")");
    }
    grid.insert(lead);
  }

  const std::vector<int> leads(grid.begin(), grid.end());
  std::map<std::string, ObservationSeries> series;
  for (const auto& [key, rows] : groups) {
    auto it = series.find(key.first);
    if (it == series.end()) it = series.emplace(key.first, ObservationSeries(key.first, leads)).first;
    Eigen::VectorXd values =
        Eigen::VectorXd::Constant(static_cast<Index>(leads.size()),
                                  std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 0; t < leads.size(); ++t) {
      if (const auto r = rows.find(leads[t]); r != rows.end()) values(static_cast<Index>(t)) = r->second;
    }
    it->second.insert(key.second, std::move(values));
  }
  std::vector<ObservationSeries> out;
  for (auto& [name, s] : series) out.push_back(std::move(s));
  return out;
}

std::vector<ObservationSeries> read_observations(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_observations(in, path.string());
}

void write_observations(std::ostream& out, const std::vector<ObservationSeries>& observations) {
  out << "date,station,lead_time,obs\n";
  for (const auto& series : observations) {
    for (const auto& [date, values] : series.days()) {
      for (Index t = 0; t < values.size(); ++t) {
        out << date.iso() << ',' << series.station_id() << ','
            << series.lead_times()[static_cast<std::size_t>(t)] << ','
            << format_number(values(t)) << '\n';
      }
    }
  }
}

std::vector<ScenarioRecord> read_scenarios(std::istream& in, const std::string& source) {
  CsvReader reader(in, source);
  std::vector<std::string> header;
  if (!reader.next(header)) reader.fail("empty scenario file");
  expect_prefix(reader, header, {"date", "station", "provenance", "lead_time"});
  const std::size_t members = header.size() - 4;
  if (members < 1) reader.fail("scenario file has no member columns");

  struct Group {
    Provenance provenance;
    std::map<int, Eigen::VectorXd> rows;
  };
  std::map<std::tuple<std::string, Date, Provenance>, Group> groups;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != header.size()) {
      reader.fail("expected " + std::to_string(header.size()) + " fields, found " +
                  std::to_string(fields.size()));
    }
    const Date date = reader.date(fields[0]);
    Provenance provenance{};
    try {
      provenance = provenance_from_string(fields[2]);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    const int lead = reader.integer(fields[3], "lead_time");
    Eigen::VectorXd row(static_cast<Index>(members));
    for (std::size_t i = 0; i < members; ++i) {
      row(static_cast<Index>(i)) = reader.number(fields[i + 4], header[i + 4]);
    }
    auto& group = groups[{fields[1], date, provenance}];
    group.provenance = provenance;
    if (!group.rows.emplace(lead, std::move(row)).second) {
      reader.fail("duplicate scenario row for lead " + std::to_string(lead));
    }
  }
  std::vector<ScenarioRecord> out;
  for (auto& [key, group] : groups) {
    Eigen::MatrixXd m(static_cast<Index>(group.rows.size()), static_cast<Index>(members));
    Index t = 0;
    for (auto& [lead, row] : group.rows) m.row(t++) = row.transpose();
    out.push_back({std::get<1>(key), std::get<0>(key), ScenarioSet(std::move(m), group.provenance)});
  }
  return out;
}

std::vector<ScenarioRecord> read_scenarios(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_scenarios(in, path.string());
}

void write_scenarios(std::ostream& out, const std::vector<ScenarioRecord>& records) {
  if (records.empty()) return;
  const Index members = records.front().scenarios.member_count();
  out << "date,station,provenance,lead_time";
  for (Index i = 1; i <= members; ++i) out << ",member_" << i;
  out << '\n';
  for (const auto& r : records) {
    const auto& v = r.scenarios.values();
    for (Index t = 0; t < v.rows(); ++t) {
      out << r.date.iso() << ',' << r.station << ',' << to_string(r.scenarios.provenance()) << ','
          << t + 1;
      for (Index i = 0; i < v.cols(); ++i) out << ',' << format_number(v(t, i));
      out << '\n';
    }
  }
}

void write_coefficients(std::ostream& out, const std::vector<CoefficientRecord>& records) {
  out << "date,station,lead_time,a,b,c,d\n";
  for (const auto& r : records) {
    out << r.date.iso() << ',' << r.station << ',' << r.lead_time << ','
        << format_number(r.params.a) << ',' << format_number(r.params.b) << ','
        << format_number(r.params.c) << ',' << format_number(r.params.d) << '\n';
  }
}

std::map<std::string, std::string> read_key_values(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> out;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    std::string text = trim(line.substr(0, comment));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError(source, line_no, "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    out[section.empty() ? key : section + "." + key] = trim(text.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_key_values(in, path.string());
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace decc::io
