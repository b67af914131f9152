#pragma once

#include "decc/types.hpp"

#include <cstdint>
#include <vector>

namespace decc {

/// Controls for the synthetic truth + raw-ensemble generator.
///
/// Per (station, day) the forecastable part of the wind is
///   s_t = level + diurnal(t) + AR(1, phi_truth) signal,
/// observations are y_t = max(0, s_t - e_t) with e an AR(1, phi_err) error,
/// and the ensemble mean is centred on s_t + bias = truth + bias + e_t.
/// Members add a cluster offset (shared by the members driven by the same
/// cluster) and member-level AR(1) noise; the raw member spread is
/// spread_factor * error_sd. A daily predictability factor scales the error
/// and the member spread together, so spread carries skill information.
struct GeneratorConfig {
  int days = 165;
  int stations = 3;
  int lead_count = 21;
  int members = 20;
  Date start{2013, 1, 1};

  double base_wind = 8.0;          ///< climatological level (m/s)
  double level_sd = 2.5;           ///< day-to-day level variability (m/s)
  double diurnal_amplitude = 1.5;  ///< m/s
  double phi_truth = 0.9;
  double signal_sd = 1.5;  ///< stationary sd of the AR(1) signal (m/s)

  double phi_err = 0.7;
  double error_sd = 1.5;  ///< stationary sd of the ensemble-mean error (m/s)
  double bias = 0.5;      ///< m/s
  double predictability_sd = 0.3;  ///< log-sd of a daily factor scaling error and spread

  double spread_factor = 0.4;  ///< raw member sd / error sd
  int clusters = 4;
  double cluster_share = 0.1;  ///< share of member variance from cluster offsets
  double phi_cluster = 0.95;
  double phi_member = 0.2;

  double resolution = 0.01;  ///< quantisation step (m/s); 0 disables
  std::uint64_t seed = 20130301;

  void validate() const;
};

struct SyntheticData {
  std::vector<EnsembleForecast> forecasts;
  std::vector<ObservationSeries> observations;
};

SyntheticData generate(const GeneratorConfig& config);

/// Station label used by the generator ("S01", "S02", ...).
std::string synthetic_station_name(int index);

}  // namespace decc
