#include "decc/calibration.hpp"

#include "decc/log.hpp"
#include "decc/normal.hpp"
#include "decc/ranks.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace decc {

double crps_normal(double mu, double sigma, double y) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("crps_normal: sigma must be positive");
  }
  const double z = (y - mu) / sigma;
  return sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) -
                  1.0 / std::sqrt(std::numbers::pi));
}

namespace {

constexpr double kMinVariance = 1e-12;

double mean_crps(const std::vector<EmosSample>& samples, const EmosParams& p) {
  double sum = 0.0;
  for (const auto& s : samples) {
    const double var = std::max(p.variance(s.variance), kMinVariance);
    sum += crps_normal(p.mean(s.mean), std::sqrt(var), s.observed);
  }
  return sum / static_cast<double>(samples.size());
}

EmosParams from_search(const Eigen::VectorXd& x) {
  // Variance coefficients enter squared so that c, d >= 0 throughout.
  return {x(0), x(1), x(2) * x(2), x(3) * x(3)};
}

}  // namespace

EmosFit fit_emos(const std::vector<EmosSample>& samples, EmosOptions options) {
  EmosFit fit;
  fit.samples = static_cast<int>(samples.size());
  if (fit.samples < options.min_samples) {
    log::warn("EMOS fit has " + std::to_string(fit.samples) + " usable samples (< " +
              std::to_string(options.min_samples) + "); using identity coefficients");
    fit.params = EmosParams::identity();
    fit.fallback = true;
    fit.mean_crps = samples.empty() ? 0.0 : mean_crps(samples, fit.params);
    return fit;
  }
  const Eigen::Vector4d start(0.0, 1.0, std::sqrt(options.initial_c), 1.0);
  const Eigen::Vector4d steps(1.0, 0.2, 0.5, 0.3);
  const auto objective = [&](const Eigen::VectorXd& x) {
    return mean_crps(samples, from_search(x));
  };
  const auto result = nelder_mead(objective, start, steps, options.optimizer);
  fit.params = from_search(result.x);
  fit.mean_crps = result.value;
  fit.iterations = result.iterations;
  return fit;
}

EmosFit fit_emos(const TrainingWindow& window, Index lead, EmosOptions options) {
  std::vector<EmosSample> samples;
  samples.reserve(window.cases.size());
  for (const auto& c : window.cases) {
    if (lead >= c.observed.size()) {
      throw std::invalid_argument("fit_emos: lead index outside the training grid");
    }
    const double y = c.observed(lead);
    if (std::isnan(y)) continue;
    samples.push_back({c.ensemble_mean(lead), c.ensemble_variance(lead), y});
  }
  return fit_emos(samples, options);
}

EmosCoefficients fit_emos_all(const TrainingWindow& window, Index lead_count,
                              EmosOptions options) {
  EmosCoefficients coeffs;
  coeffs.per_lead.reserve(static_cast<std::size_t>(lead_count));
  for (Index t = 0; t < lead_count; ++t) {
    if (window.cases.empty()) {
      coeffs.per_lead.push_back(fit_emos(std::vector<EmosSample>{}, options).params);
    } else {
      coeffs.per_lead.push_back(fit_emos(window, t, options).params);
    }
  }
  return coeffs;
}

QuantileSet emit_quantiles(const EmosCoefficients& coeffs, const EnsembleForecast& f) {
  const Index lead_count = f.lead_count();
  const Index n = f.member_count();
  if (static_cast<Index>(coeffs.per_lead.size()) != lead_count) {
    throw std::invalid_argument("emit_quantiles: coefficient count does not match lead times");
  }
  const Eigen::VectorXd mean = ensemble_mean(f);
  const Eigen::VectorXd variance = ensemble_variance(f);
  const Eigen::VectorXd tau = QuantileSet::levels(n);
  Eigen::VectorXd z(n);
  for (Index k = 0; k < n; ++k) z(k) = normal_quantile(tau(k));

  Eigen::MatrixXd q(lead_count, n);
  for (Index t = 0; t < lead_count; ++t) {
    const auto& p = coeffs.per_lead[static_cast<std::size_t>(t)];
    const double mu = p.mean(mean(t));
    const double var = p.variance(variance(t));
    const double sigma = var > 0.0 ? std::sqrt(var) : 0.0;
    for (Index k = 0; k < n; ++k) q(t, k) = std::max(0.0, mu + sigma * z(k));
  }
  return QuantileSet(std::move(q));
}

}  // namespace decc
