#include "decc/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace decc {

void GeneratorConfig::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("generator config: ") + what);
  };
  require(days >= 1 && stations >= 1, "days and stations must be positive");
  require(lead_count >= 2 && members >= 2, "need at least 2 lead times and 2 members");
  require(phi_truth > 0.0 && phi_truth < 1.0, "phi_truth must lie in (0, 1)");
  require(phi_err >= 0.0 && phi_err < 1.0, "phi_err must lie in [0, 1)");
  require(phi_cluster >= 0.0 && phi_cluster < 1.0, "phi_cluster must lie in [0, 1)");
  require(phi_member >= 0.0 && phi_member < 1.0, "phi_member must lie in [0, 1)");
  require(spread_factor > 0.0, "spread_factor must be positive");
  require(clusters >= 1 && clusters <= members, "clusters must lie in 1..members");
  require(cluster_share >= 0.0 && cluster_share <= 1.0, "cluster_share must lie in [0, 1]");
  require(error_sd >= 0.0 && signal_sd >= 0.0 && level_sd >= 0.0, "sds must be non-negative");
  require(resolution >= 0.0, "resolution must be non-negative");
  require(predictability_sd >= 0.0, "predictability_sd must be non-negative");
}

std::string synthetic_station_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%02d", index + 1);
  return buf;
}

namespace {

/// Stationary AR(1) path of length n with marginal sd `sd`.
Eigen::VectorXd ar1_path(Index n, double phi, double sd, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(n);
  const double innovation = sd * std::sqrt(1.0 - phi * phi);
  x(0) = sd * normal(rng);
  for (Index t = 1; t < n; ++t) x(t) = phi * x(t - 1) + innovation * normal(rng);
  return x;
}

double quantize(double v, double step) {
  v = std::max(0.0, v);
  if (step <= 0.0) return v;
  // Divide by the integer 1/step when there is one, so 0.01 steps print as
  // two decimals rather than 9.210000000000001.
  const double per_unit = std::round(1.0 / step);
  if (std::abs(per_unit * step - 1.0) < 1e-12) return std::round(v * per_unit) / per_unit;
  return std::round(v / step) * step;
}

}  // namespace

SyntheticData generate(const GeneratorConfig& config) {
  config.validate();
  const Index lead_count = config.lead_count;
  const Index members = config.members;
  std::vector<int> leads(static_cast<std::size_t>(lead_count));
  std::iota(leads.begin(), leads.end(), 1);

  const double spread = config.spread_factor * config.error_sd;
  const double cluster_sd = spread * std::sqrt(config.cluster_share);
  const double member_sd = spread * std::sqrt(1.0 - config.cluster_share);
  const bool clustered = config.cluster_share > 0.0;

  SyntheticData out;
  for (int s = 0; s < config.stations; ++s) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32), static_cast<std::uint32_t>(s)};
    Rng rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 24.0);
    const std::string station = synthetic_station_name(s);
    const double phase = uniform(rng);

    ObservationSeries obs(station, leads);
    for (int d = 0; d < config.days; ++d) {
      const Date date = config.start + d;
      const double level = config.base_wind + config.level_sd * normal(rng);
      const Eigen::VectorXd signal = ar1_path(lead_count, config.phi_truth, config.signal_sd, rng);
      // Daily predictability: scales error and spread alike, with E[kappa^2] = 1.
      const double v = config.predictability_sd;
      const double kappa = std::exp(v * normal(rng) - v * v);
      const Eigen::VectorXd error = ar1_path(lead_count, config.phi_err, config.error_sd * kappa, rng);

      Eigen::VectorXd centre(lead_count);
      Eigen::VectorXd truth(lead_count);
      for (Index t = 0; t < lead_count; ++t) {
        const double hour = static_cast<double>(leads[static_cast<std::size_t>(t)]);
        const double diurnal =
            config.diurnal_amplitude * std::sin(2.0 * std::numbers::pi * (hour + phase) / 24.0);
        centre(t) = level + diurnal + signal(t);
        truth(t) = quantize(centre(t) - error(t), config.resolution);
      }

      std::vector<Eigen::VectorXd> offsets;
      for (int k = 0; k < config.clusters; ++k) {
        offsets.push_back(clustered ? ar1_path(lead_count, config.phi_cluster, cluster_sd * kappa, rng)
                                    : Eigen::VectorXd::Zero(lead_count));
      }
      Eigen::MatrixXd x(lead_count, members);
      for (Index i = 0; i < members; ++i) {
        const auto cluster = static_cast<std::size_t>(i * config.clusters / members);
        const Eigen::VectorXd noise = ar1_path(lead_count, config.phi_member, member_sd * kappa, rng);
        for (Index t = 0; t < lead_count; ++t) {
          x(t, i) = quantize(centre(t) + config.bias + offsets[cluster](t) + noise(t),
                             config.resolution);
        }
      }
      out.forecasts.emplace_back(date, station, leads, std::move(x));
      obs.insert(date, std::move(truth));
    }
    out.observations.push_back(std::move(obs));
  }
  return out;
}

}  // namespace decc
