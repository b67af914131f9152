#include "decc/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace decc {

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    throw std::invalid_argument("invalid calendar date");
  }
  day_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view iso) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  const std::string s(iso);
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
      std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw std::invalid_argument("malformed date '" + s + "' (expected YYYY-MM-DD)");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) {
    throw std::invalid_argument("invalid calendar date '" + s + "'");
  }
  return Date{std::chrono::sys_days{ymd}};
}

std::string Date::iso() const {
  const std::chrono::year_month_day ymd{day_};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::raw: return "raw";
    case Provenance::ecc: return "ecc";
    case Provenance::decc: return "decc";
    case Provenance::climatological_template: return "climatological-template";
  }
  return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "raw") return Provenance::raw;
  if (s == "ecc") return Provenance::ecc;
  if (s == "decc" || s == "d-ecc") return Provenance::decc;
  if (s == "climatological-template" || s == "climatology") {
    return Provenance::climatological_template;
  }
  throw std::invalid_argument("unknown provenance '" + std::string(s) + "'");
}

EnsembleForecast::EnsembleForecast(Date run_date, std::string station_id,
                                   std::vector<int> lead_times, Eigen::MatrixXd members)
    : run_date_(run_date),
      station_id_(std::move(station_id)),
      lead_times_(std::move(lead_times)),
      members_(std::move(members)) {
  if (members_.rows() < 2 || members_.cols() < 2) {
    throw std::invalid_argument("ensemble forecast needs at least 2 lead times and 2 members");
  }
  if (static_cast<Index>(lead_times_.size()) != members_.rows()) {
    throw std::invalid_argument("lead time grid does not match member matrix rows");
  }
  if (!std::is_sorted(lead_times_.begin(), lead_times_.end()) ||
      std::adjacent_find(lead_times_.begin(), lead_times_.end()) != lead_times_.end()) {
    throw std::invalid_argument("lead times must be strictly increasing");
  }
  for (Index t = 0; t < members_.rows(); ++t) {
    for (Index i = 0; i < members_.cols(); ++i) {
      const double v = members_(t, i);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream os;
        os << "invalid wind speed " << v << " at lead " << lead_times_[t] << ", member "
           << i + 1 << " (" << station_id_ << ", " << run_date_.iso() << ")";
        throw std::invalid_argument(os.str());
      }
    }
  }
}

ObservationSeries::ObservationSeries(std::string station_id, std::vector<int> lead_times)
    : station_id_(std::move(station_id)), lead_times_(std::move(lead_times)) {}

void ObservationSeries::insert(Date date, Eigen::VectorXd values) {
  if (values.size() != lead_count()) {
    throw std::invalid_argument("observation vector length does not match the lead-time grid");
  }
  for (Index t = 0; t < values.size(); ++t) {
    const double v = values(t);
    if (!std::isnan(v) && (!std::isfinite(v) || v < 0.0)) {
      throw std::invalid_argument("invalid observation " + std::to_string(v) + " on " +
                                  date.iso() + " at lead " + std::to_string(lead_times_[t]));
    }
  }
  days_.insert_or_assign(date, std::move(values));
}

const Eigen::VectorXd* ObservationSeries::find(Date date) const {
  const auto it = days_.find(date);
  return it == days_.end() ? nullptr : &it->second;
}

bool ObservationSeries::complete(Date date) const {
  const auto* v = find(date);
  return v != nullptr && !v->array().isNaN().any();
}

QuantileSet::QuantileSet(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.cols() < 1 || values_.rows() < 1) {
    throw std::invalid_argument("quantile set must be non-empty");
  }
  for (Index t = 0; t < values_.rows(); ++t) {
    for (Index n = 0; n < values_.cols(); ++n) {
      if (!std::isfinite(values_(t, n)) || values_(t, n) < 0.0) {
        throw std::invalid_argument("quantile values must be finite and non-negative");
      }
      if (n > 0 && values_(t, n) < values_(t, n - 1)) {
        throw std::invalid_argument("quantile row " + std::to_string(t) + " is not sorted");
      }
    }
  }
}

Eigen::VectorXd QuantileSet::levels(Index member_count) {
  Eigen::VectorXd tau(member_count);
  for (Index n = 0; n < member_count; ++n) {
    tau(n) = static_cast<double>(n + 1) / static_cast<double>(member_count + 1);
  }
  return tau;
}

ScenarioSet::ScenarioSet(Eigen::MatrixXd values, Provenance provenance)
    : values_(std::move(values)), provenance_(provenance) {
  if (!values_.allFinite()) {
    throw std::invalid_argument("scenario values must be finite");
  }
}

}  // namespace decc
