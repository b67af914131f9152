#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace decc {

using Index = Eigen::Index;
using Rng = std::mt19937_64;

/// Calendar day, stored as days since 1970-01-01.
class Date {
public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days day) : day_(day) {}
  Date(int year, unsigned month, unsigned day);

  /// Parses YYYY-MM-DD; throws std::invalid_argument otherwise.
  static Date parse(std::string_view iso);

  std::string iso() const;
  std::chrono::sys_days sys_days() const { return day_; }
  std::int64_t serial() const { return day_.time_since_epoch().count(); }

  Date operator+(int days) const { return Date{day_ + std::chrono::days{days}}; }
  Date operator-(int days) const { return Date{day_ - std::chrono::days{days}}; }
  int operator-(const Date& other) const {
    return static_cast<int>((day_ - other.day_).count());
  }

  auto operator<=>(const Date&) const = default;

private:
  std::chrono::sys_days day_{};
};

enum class TiePolicy { random, first_occurrence };

enum class Provenance { raw, ecc, decc, climatological_template };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// Raw ensemble for one (station, run date). Rows are lead times, columns are
/// members; column i is the same physical member at every lead time.
class EnsembleForecast {
public:
  EnsembleForecast(Date run_date, std::string station_id, std::vector<int> lead_times,
                   Eigen::MatrixXd members);

  Date run_date() const { return run_date_; }
  const std::string& station_id() const { return station_id_; }
  const std::vector<int>& lead_times() const { return lead_times_; }
  const Eigen::MatrixXd& members() const { return members_; }
  Index lead_count() const { return members_.rows(); }
  Index member_count() const { return members_.cols(); }

private:
  Date run_date_;
  std::string station_id_;
  std::vector<int> lead_times_;
  Eigen::MatrixXd members_;
};

/// Observed trajectories of one station, keyed by run date. Missing values are NaN.
class ObservationSeries {
public:
  ObservationSeries(std::string station_id, std::vector<int> lead_times);

  void insert(Date date, Eigen::VectorXd values);

  const std::string& station_id() const { return station_id_; }
  const std::vector<int>& lead_times() const { return lead_times_; }
  Index lead_count() const { return static_cast<Index>(lead_times_.size()); }
  const std::map<Date, Eigen::VectorXd>& days() const { return days_; }

  /// nullptr when the date is absent.
  const Eigen::VectorXd* find(Date date) const;
  bool complete(Date date) const;

private:
  std::string station_id_;
  std::vector<int> lead_times_;
  std::map<Date, Eigen::VectorXd> days_;
};

/// Calibrated marginals: N equidistant quantiles at levels n/(N+1) per lead time.
class QuantileSet {
public:
  explicit QuantileSet(Eigen::MatrixXd values);

  static Eigen::VectorXd levels(Index member_count);

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::VectorXd levels() const { return levels(member_count()); }
  Index lead_count() const { return values_.rows(); }
  Index member_count() const { return values_.cols(); }

private:
  Eigen::MatrixXd values_;
};

class ScenarioSet {
public:
  ScenarioSet(Eigen::MatrixXd values, Provenance provenance);

  const Eigen::MatrixXd& values() const { return values_; }
  Provenance provenance() const { return provenance_; }
  Index lead_count() const { return values_.rows(); }
  Index member_count() const { return values_.cols(); }

private:
  Eigen::MatrixXd values_;
  Provenance provenance_;
};

struct RankMatrix {
  Eigen::MatrixXi ranks;  ///< entries in 1..N, each row a permutation
  TiePolicy policy = TiePolicy::random;
};

}  // namespace decc
