#pragma once

#include "decc/dataset.hpp"
#include "decc/nelder_mead.hpp"
#include "decc/types.hpp"

#include <vector>

namespace decc {

/// Closed-form CRPS of N(mu, sigma^2) against y. Throws std::invalid_argument
/// for sigma <= 0.
double crps_normal(double mu, double sigma, double y);

/// NGR coefficients for one lead time: mean a + b*m, variance c + d*s^2.
struct EmosParams {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;
  double d = 1.0;

  static EmosParams identity() { return {}; }
  double mean(double ensemble_mean) const { return a + b * ensemble_mean; }
  double variance(double ensemble_variance) const { return c + d * ensemble_variance; }
};

struct EmosFit {
  EmosParams params;
  double mean_crps = 0.0;
  int samples = 0;
  int iterations = 0;
  bool fallback = false;  ///< identity coefficients used for lack of data
};

struct EmosOptions {
  int min_samples = 15;
  double initial_c = 0.01;
  NelderMeadOptions optimizer{};
};

/// One (ensemble mean, ensemble variance, observation) training triple.
struct EmosSample {
  double mean;
  double variance;
  double observed;
};

EmosFit fit_emos(const std::vector<EmosSample>& samples, EmosOptions options = {});

/// Fits lead time `lead` (0-based row) from the window's usable days.
EmosFit fit_emos(const TrainingWindow& window, Index lead, EmosOptions options = {});

/// Per-lead-time coefficients for a whole forecast.
struct EmosCoefficients {
  std::vector<EmosParams> per_lead;
};

EmosCoefficients fit_emos_all(const TrainingWindow& window, Index lead_count,
                              EmosOptions options = {});

/// q_t^n = max(0, mu_t + sigma_t * Phi^{-1}(n / (N + 1))).
QuantileSet emit_quantiles(const EmosCoefficients& coeffs, const EnsembleForecast& f);

}  // namespace decc
