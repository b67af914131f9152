#include "decc/dataset.hpp"

#include "decc/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace decc {

Dataset::Dataset(std::vector<EnsembleForecast> forecasts,
                 std::vector<ObservationSeries> observations) {
  for (auto& f : forecasts) add(std::move(f));
  for (auto& o : observations) add(std::move(o));
}

void Dataset::add(EnsembleForecast forecast) {
  auto key = std::make_pair(forecast.station_id(), forecast.run_date());
  if (forecasts_.count(key) != 0) {
    throw std::invalid_argument("duplicate forecast for " + key.first + " on " +
                                key.second.iso());
  }
  forecasts_.emplace(std::move(key), std::move(forecast));
}

void Dataset::add(ObservationSeries observations) {
  auto it = observations_.find(observations.station_id());
  if (it == observations_.end()) {
    observations_.emplace(observations.station_id(), std::move(observations));
    return;
  }
  if (it->second.lead_times() != observations.lead_times()) {
    throw std::invalid_argument("observation lead grids differ for station " +
                                observations.station_id());
  }
  for (const auto& [date, values] : observations.days()) {
    it->second.insert(date, values);
  }
}

std::vector<std::string> Dataset::stations() const {
  std::set<std::string> names;
  for (const auto& [key, f] : forecasts_) names.insert(key.first);
  return {names.begin(), names.end()};
}

std::vector<Date> Dataset::dates(const std::string& station) const {
  std::vector<Date> out;
  auto it = forecasts_.lower_bound({station, Date{}});
  for (; it != forecasts_.end() && it->first.first == station; ++it) {
    out.push_back(it->first.second);
  }
  return out;
}

std::vector<Date> Dataset::all_dates() const {
  std::set<Date> dates;
  for (const auto& [key, f] : forecasts_) dates.insert(key.second);
  return {dates.begin(), dates.end()};
}

const EnsembleForecast* Dataset::forecast(const std::string& station, Date date) const {
  const auto it = forecasts_.find({station, date});
  return it == forecasts_.end() ? nullptr : &it->second;
}

const ObservationSeries* Dataset::observations(const std::string& station) const {
  const auto it = observations_.find(station);
  return it == observations_.end() ? nullptr : &it->second;
}

Index TrainingWindow::lead_count() const {
  return cases.empty() ? 0 : cases.front().ensemble_mean.size();
}

TrainingWindow make_training_window(const Dataset& data, const std::string& station, Date target,
                                    int length_days) {
  TrainingWindow window{target, length_days, {}};
  const ObservationSeries* obs = data.observations(station);
  for (int back = length_days; back >= 1; --back) {
    const Date day = target - back;
    const EnsembleForecast* f = data.forecast(station, day);
    if (f == nullptr) continue;
    Eigen::VectorXd observed =
        Eigen::VectorXd::Constant(f->lead_count(), std::numeric_limits<double>::quiet_NaN());
    if (obs != nullptr) {
      if (const auto* v = obs->find(day); v != nullptr && v->size() == f->lead_count()) {
        observed = *v;
      }
    }
    if (observed.array().isNaN().all()) continue;
    window.cases.push_back({day, ensemble_mean(*f), ensemble_variance(*f), std::move(observed)});
  }
  return window;
}

}  // namespace decc
