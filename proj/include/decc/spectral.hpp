#pragma once

#include "decc/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace decc {

/// Frequencies k/T (cycles per step) for k = 1..floor(T/2).
Eigen::VectorXd spectrum_frequencies(Index length);

/// Amplitudes of the mean-removed series by direct DFT summation:
/// 2|X_k|/T for k < T/2 and |X_k|/T at the Nyquist bin of an even-length
/// series, so that every entry is the amplitude of the matching cosine.
/// Throws std::invalid_argument on missing (NaN) values.
Eigen::VectorXd amplitude_spectrum(const Eigen::VectorXd& series);

/// Frequency-wise mean amplitudes, grouped by source label.
class AmplitudeSpectrum {
public:
  explicit AmplitudeSpectrum(Index length);

  void add(const std::string& source, const Eigen::VectorXd& series);

  Index length() const { return length_; }
  const Eigen::VectorXd& frequencies() const { return frequencies_; }
  std::vector<std::string> sources() const;
  long count(const std::string& source) const;
  Eigen::VectorXd mean(const std::string& source) const;

  /// Mean amplitude over bins whose period T/k is at most `max_period`.
  double band_mean(const std::string& source, double max_period) const;

private:
  struct Accumulator {
    Eigen::VectorXd sum;
    long count = 0;
  };
  Index length_;
  Eigen::VectorXd frequencies_;
  std::map<std::string, Accumulator> sources_;
};

struct LabelledSeries {
  std::string source;
  Eigen::VectorXd series;
};

AmplitudeSpectrum mean_spectrum(const std::vector<LabelledSeries>& collection);

}  // namespace decc
