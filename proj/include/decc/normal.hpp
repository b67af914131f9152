#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace decc {

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Inverse standard normal CDF for p in (0, 1): rational approximation
/// followed by one Halley step against erfc.
double normal_quantile(double p);

}  // namespace decc
