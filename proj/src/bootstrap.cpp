#include "decc/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace decc {

BootstrapPlan BootstrapPlan::make(std::vector<Date> days, int replicates, std::uint64_t seed) {
  if (days.size() < 2) {
    throw std::invalid_argument("block bootstrap needs at least two distinct days");
  }
  if (replicates < 1) throw std::invalid_argument("bootstrap needs at least one replicate");
  BootstrapPlan plan{std::move(days), {}};
  plan.draws.resize(static_cast<std::size_t>(replicates));
  for (int r = 0; r < replicates; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    Rng rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, plan.days.size() - 1);
    auto& draw = plan.draws[static_cast<std::size_t>(r)];
    draw.resize(plan.days.size());
    for (auto& d : draw) d = pick(rng);
  }
  return plan;
}

const BootstrapDistribution& BootstrapSummary::at(const std::string& kind) const {
  const auto it = kinds.find(kind);
  if (it == kinds.end()) throw std::out_of_range("no bootstrap distribution for '" + kind + "'");
  return it->second;
}

double BootstrapSummary::fraction_below(const std::string& lhs, const std::string& rhs) const {
  const auto& a = at(lhs).replicate_means;
  const auto& b = at(rhs).replicate_means;
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("paired bootstrap comparison needs equal replicate counts");
  }
  std::size_t below = 0;
  for (std::size_t r = 0; r < a.size(); ++r) below += a[r] < b[r] ? 1 : 0;
  return static_cast<double>(below) / static_cast<double>(a.size());
}

double sample_quantile(std::vector<double> values, double level) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = level * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BootstrapSummary block_bootstrap(const ScoreTable& samples, int replicates, std::uint64_t seed) {
  std::set<Date> days;
  for (const auto& s : samples) days.insert(s.date);
  return block_bootstrap(samples, BootstrapPlan::make({days.begin(), days.end()}, replicates, seed));
}

BootstrapSummary block_bootstrap(const ScoreTable& samples, const BootstrapPlan& plan) {
  std::map<Date, std::size_t> day_index;
  for (std::size_t d = 0; d < plan.days.size(); ++d) day_index.emplace(plan.days[d], d);

  struct Totals {
    std::vector<double> sum;
    std::vector<long> count;
  };
  std::map<std::string, Totals> per_kind;
  for (const auto& s : samples) {
    const auto it = day_index.find(s.date);
    if (it == day_index.end()) {
      throw std::invalid_argument("score dated " + s.date.iso() + " is outside the bootstrap plan");
    }
    auto& totals = per_kind[s.kind];
    if (totals.sum.empty()) {
      totals.sum.assign(plan.days.size(), 0.0);
      totals.count.assign(plan.days.size(), 0);
    }
    totals.sum[it->second] += s.value;
    ++totals.count[it->second];
  }

  BootstrapSummary summary;
  summary.replicates = plan.replicates();
  summary.days = plan.days.size();
  for (const auto& [kind, totals] : per_kind) {
    BootstrapDistribution dist;
    double all_sum = 0.0;
    long all_count = 0;
    for (std::size_t d = 0; d < plan.days.size(); ++d) {
      all_sum += totals.sum[d];
      all_count += totals.count[d];
    }
    dist.sample_mean = all_sum / static_cast<double>(all_count);
    dist.replicate_means.reserve(plan.draws.size());
    for (const auto& draw : plan.draws) {
      double sum = 0.0;
      long count = 0;
      for (std::size_t d : draw) {
        sum += totals.sum[d];
        count += totals.count[d];
      }
      dist.replicate_means.push_back(count > 0 ? sum / static_cast<double>(count)
                                               : std::numeric_limits<double>::quiet_NaN());
    }
    for (std::size_t k = 0; k < kBootstrapLevels.size(); ++k) {
      dist.quantiles[k] = sample_quantile(dist.replicate_means, kBootstrapLevels[k]);
    }
    summary.kinds.emplace(kind, std::move(dist));
  }
  return summary;
}

}  // namespace decc
