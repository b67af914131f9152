#pragma once

#include "decc/calibration.hpp"
#include "decc/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace decc::io {

/// Malformed input, tagged with the 1-based line number.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string source, std::size_t line, const std::string& message);

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

private:
  std::string source_;
  std::size_t line_;
};

/// Shortest text that reads back to the same double; NaN prints as an empty field.
std::string format_number(double value);

/// Forecast CSV: date,station,lead_time,m01,...,mNN. Rows are grouped by
/// (date, station); groups missing any lead time of the file's lead grid are
/// dropped with a warning.
std::vector<EnsembleForecast> read_forecasts(std::istream& in, const std::string& source = "<stream>");
std::vector<EnsembleForecast> read_forecasts(const std::filesystem::path& path);
void write_forecasts(std::ostream& out, const std::vector<EnsembleForecast>& forecasts);

/// Observation CSV: date,station,lead_time,obs with an empty obs field for a
/// missing value.
std::vector<ObservationSeries> read_observations(std::istream& in,
                                                 const std::string& source = "<stream>");
std::vector<ObservationSeries> read_observations(const std::filesystem::path& path);
void write_observations(std::ostream& out, const std::vector<ObservationSeries>& observations);

struct ScenarioRecord {
  Date date;
  std::string station;
  ScenarioSet scenarios;
};

/// Scenario CSV: date,station,provenance,lead_time,member_1,...,member_N.
std::vector<ScenarioRecord> read_scenarios(std::istream& in, const std::string& source = "<stream>");
std::vector<ScenarioRecord> read_scenarios(const std::filesystem::path& path);
void write_scenarios(std::ostream& out, const std::vector<ScenarioRecord>& records);

struct CoefficientRecord {
  Date date;
  std::string station;
  int lead_time = 0;
  EmosParams params;
};

/// Coefficient CSV: date,station,lead_time,a,b,c,d.
void write_coefficients(std::ostream& out, const std::vector<CoefficientRecord>& records);

/// Reads a key=value file with optional [section] headers into
/// "section.key" -> value. '#' and ';' start comments.
std::map<std::string, std::string> read_key_values(std::istream& in,
                                                   const std::string& source = "<stream>");
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

/// Writes `content` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace decc::io
