#pragma once

#include "decc/types.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace decc {

/// Forecasts and observations for a set of stations, indexed by (station, date).
class Dataset {
public:
  Dataset() = default;
  Dataset(std::vector<EnsembleForecast> forecasts, std::vector<ObservationSeries> observations);

  void add(EnsembleForecast forecast);
  void add(ObservationSeries observations);

  std::vector<std::string> stations() const;
  /// Run dates with a forecast for the station, ascending.
  std::vector<Date> dates(const std::string& station) const;
  /// All run dates across stations, ascending and unique.
  std::vector<Date> all_dates() const;

  const EnsembleForecast* forecast(const std::string& station, Date date) const;
  const ObservationSeries* observations(const std::string& station) const;

  std::size_t forecast_count() const { return forecasts_.size(); }
  const std::map<std::pair<std::string, Date>, EnsembleForecast>& forecasts() const {
    return forecasts_;
  }
  const std::map<std::string, ObservationSeries>& observation_series() const {
    return observations_;
  }

private:
  std::map<std::pair<std::string, Date>, EnsembleForecast> forecasts_;
  std::map<std::string, ObservationSeries> observations_;
};

/// Summary of one past (forecast, observation) day used for training.
struct TrainingCase {
  Date date;
  Eigen::VectorXd ensemble_mean;
  Eigen::VectorXd ensemble_variance;
  Eigen::VectorXd observed;  ///< NaN where missing
};

/// Days strictly before the target date, at most `length_days` back.
struct TrainingWindow {
  Date target;
  int length_days = 45;
  std::vector<TrainingCase> cases;

  Index lead_count() const;
};

TrainingWindow make_training_window(const Dataset& data, const std::string& station, Date target,
                                    int length_days);

}  // namespace decc
