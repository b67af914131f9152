#include "decc/spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace decc {

Eigen::VectorXd spectrum_frequencies(Index length) {
  const Index bins = length / 2;
  Eigen::VectorXd f(bins);
  for (Index k = 1; k <= bins; ++k) f(k - 1) = static_cast<double>(k) / static_cast<double>(length);
  return f;
}

Eigen::VectorXd amplitude_spectrum(const Eigen::VectorXd& series) {
  const Index n = series.size();
  if (n < 2) throw std::invalid_argument("amplitude spectrum needs at least two values");
  if (!series.allFinite()) throw std::invalid_argument("amplitude spectrum: series has gaps");
  const Eigen::VectorXd x = series.array() - series.mean();
  const Index bins = n / 2;
  Eigen::VectorXd amp(bins);
  for (Index k = 1; k <= bins; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (Index t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * t) /
                           static_cast<double>(n);
      acc += x(t) * std::polar(1.0, angle);
    }
    const bool nyquist = 2 * k == n;
    amp(k - 1) = (nyquist ? 1.0 : 2.0) * std::abs(acc) / static_cast<double>(n);
  }
  return amp;
}

AmplitudeSpectrum::AmplitudeSpectrum(Index length)
    : length_(length), frequencies_(spectrum_frequencies(length)) {}

void AmplitudeSpectrum::add(const std::string& source, const Eigen::VectorXd& series) {
  if (series.size() != length_) {
    throw std::invalid_argument("series length does not match the spectrum grid");
  }
  auto& acc = sources_[source];
  if (acc.count == 0) acc.sum = Eigen::VectorXd::Zero(frequencies_.size());
  acc.sum += amplitude_spectrum(series);
  ++acc.count;
}

std::vector<std::string> AmplitudeSpectrum::sources() const {
  std::vector<std::string> out;
  for (const auto& [name, acc] : sources_) out.push_back(name);
  return out;
}

long AmplitudeSpectrum::count(const std::string& source) const {
  const auto it = sources_.find(source);
  return it == sources_.end() ? 0 : it->second.count;
}

Eigen::VectorXd AmplitudeSpectrum::mean(const std::string& source) const {
  const auto it = sources_.find(source);
  if (it == sources_.end()) throw std::out_of_range("no spectrum for source '" + source + "'");
  return it->second.sum / static_cast<double>(it->second.count);
}

double AmplitudeSpectrum::band_mean(const std::string& source, double max_period) const {
  const Eigen::VectorXd m = mean(source);
  double sum = 0.0;
  int bins = 0;
  for (Index k = 1; k <= m.size(); ++k) {
    if (static_cast<double>(length_) / static_cast<double>(k) <= max_period) {
      sum += m(k - 1);
      ++bins;
    }
  }
  if (bins == 0) throw std::invalid_argument("no frequency bin inside the requested band");
  return sum / bins;
}

AmplitudeSpectrum mean_spectrum(const std::vector<LabelledSeries>& collection) {
  if (collection.empty()) throw std::invalid_argument("mean_spectrum needs at least one series");
  AmplitudeSpectrum spectrum(collection.front().series.size());
  for (const auto& item : collection) spectrum.add(item.source, item.series);
  return spectrum;
}

}  // namespace decc
