#pragma once

#include "decc/types.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace decc {

/// One score value for one (date, station) case.
struct ScoreRecord {
  Date date;
  std::string station;
  std::string kind;
  double value = 0.0;
};

using ScoreTable = std::vector<ScoreRecord>;

inline constexpr std::array<double, 5> kBootstrapLevels{0.05, 0.25, 0.50, 0.75, 0.95};

/// Day indices drawn with replacement for each replicate. Replicate r draws
/// from its own generator seeded by (seed, r), so plans are reproducible and
/// shared draws make paired comparisons between score kinds possible.
struct BootstrapPlan {
  std::vector<Date> days;
  std::vector<std::vector<std::size_t>> draws;  ///< replicates x days

  static BootstrapPlan make(std::vector<Date> days, int replicates, std::uint64_t seed);
  int replicates() const { return static_cast<int>(draws.size()); }
};

struct BootstrapDistribution {
  double sample_mean = 0.0;
  std::array<double, 5> quantiles{};  ///< at kBootstrapLevels
  std::vector<double> replicate_means;
};

struct BootstrapSummary {
  int replicates = 0;
  std::size_t days = 0;
  std::map<std::string, BootstrapDistribution> kinds;

  const BootstrapDistribution& at(const std::string& kind) const;
  /// Fraction of replicates in which the mean of `lhs` is strictly below `rhs`.
  double fraction_below(const std::string& lhs, const std::string& rhs) const;
};

/// Linear-interpolation (type 7) sample quantile.
double sample_quantile(std::vector<double> values, double level);

/// Day-block bootstrap of mean scores: whole days are resampled with
/// replacement and every record of a drawn day enters the replicate mean.
/// Throws std::invalid_argument with fewer than two distinct days.
BootstrapSummary block_bootstrap(const ScoreTable& samples, int replicates, std::uint64_t seed);
BootstrapSummary block_bootstrap(const ScoreTable& samples, const BootstrapPlan& plan);

}  // namespace decc
