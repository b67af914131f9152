#include "decc/verification.hpp"

#include "decc/log.hpp"
#include "decc/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace decc {
namespace {

double euclidean(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0.0;
  for (Index t = 0; t < a.size(); ++t) {
    const double d = a(t) - b(t);
    s += d * d;
  }
  return std::sqrt(s);
}

void check_case(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs) {
  if (scenarios.rows() != obs.size()) {
    throw std::invalid_argument("scenario rows and observation length differ");
  }
  if (scenarios.cols() < 1) {
    throw std::invalid_argument("at least one scenario is required");
  }
  if (!obs.allFinite()) {
    throw std::invalid_argument("observation trajectory must be complete");
  }
}

}  // namespace

double energy_score(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs) {
  check_case(scenarios, obs);
  const Index n = scenarios.cols();
  double spread_to_obs = 0.0;
  for (Index i = 0; i < n; ++i) spread_to_obs += euclidean(scenarios.col(i), obs);
  double pairwise = 0.0;
  for (Index m = 0; m < n; ++m) {
    for (Index p = 0; p < n; ++p) pairwise += euclidean(scenarios.col(m), scenarios.col(p));
  }
  const double nn = static_cast<double>(n);
  return spread_to_obs / nn - pairwise / (2.0 * nn * nn);
}

double crps_ensemble(const Eigen::VectorXd& members, double y) {
  const Index n = members.size();
  if (n < 1) throw std::invalid_argument("crps_ensemble: empty ensemble");
  double spread_to_obs = 0.0;
  for (Index i = 0; i < n; ++i) spread_to_obs += std::abs(members(i) - y);
  double pairwise = 0.0;
  for (Index m = 0; m < n; ++m) {
    for (Index p = 0; p < n; ++p) pairwise += std::abs(members(m) - members(p));
  }
  const double nn = static_cast<double>(n);
  return spread_to_obs / nn - pairwise / (2.0 * nn * nn);
}

double variogram_score(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs, double p) {
  check_case(scenarios, obs);
  if (!(p > 0.0)) throw std::invalid_argument("variogram order must be positive");
  const Index lead_count = obs.size();
  const Index n = scenarios.cols();
  double score = 0.0;
  for (Index i = 0; i < lead_count; ++i) {
    for (Index j = 0; j < lead_count; ++j) {
      if (i == j) continue;
      const double lag = static_cast<double>(i - j);
      const double weight = 1.0 / (lag * lag);
      double forecast = 0.0;
      for (Index m = 0; m < n; ++m) {
        forecast += std::pow(std::abs(scenarios(i, m) - scenarios(j, m)), p);
      }
      forecast /= static_cast<double>(n);
      const double diff = std::pow(std::abs(obs(i) - obs(j)), p) - forecast;
      score += weight * diff * diff;
    }
  }
  return score;
}

std::string_view to_string(HistogramKind kind) {
  switch (kind) {
    case HistogramKind::univariate: return "univariate";
    case HistogramKind::average_rank: return "average-rank";
    case HistogramKind::band_depth: return "band-depth";
  }
  return "unknown";
}

int univariate_rank(const Eigen::VectorXd& members, double y, Rng& rng) {
  Eigen::VectorXd pooled(members.size() + 1);
  pooled << y, members;
  return rank_vector(pooled, TiePolicy::random, rng)(0);
}

int multivariate_rank(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs,
                      HistogramKind kind, Rng& rng) {
  check_case(scenarios, obs);
  if (kind == HistogramKind::univariate) {
    throw std::invalid_argument("multivariate_rank needs average-rank or band-depth");
  }
  const Index lead_count = obs.size();
  const Index k = scenarios.cols() + 1;
  Eigen::MatrixXd pooled(lead_count, k);
  pooled.col(0) = obs;
  pooled.rightCols(k - 1) = scenarios;
  const Eigen::MatrixXi ranks = compute_ranks(pooled, TiePolicy::random, rng).ranks;

  Eigen::VectorXd prerank(k);
  for (Index s = 0; s < k; ++s) {
    double acc = 0.0;
    for (Index t = 0; t < lead_count; ++t) {
      const double r = ranks(t, s);
      acc += kind == HistogramKind::average_rank ? r : (static_cast<double>(k) - r) * (r - 1.0);
    }
    prerank(s) = acc / static_cast<double>(lead_count);
  }
  return rank_vector(prerank, TiePolicy::random, rng)(0);
}

RankHistogram::RankHistogram(HistogramKind kind, Index member_count)
    : kind_(kind), counts_(static_cast<std::size_t>(member_count + 1), 0) {}

void RankHistogram::add(int rank) {
  if (rank < 1 || rank > static_cast<int>(counts_.size())) {
    throw std::out_of_range("rank outside 1..N+1");
  }
  ++counts_[static_cast<std::size_t>(rank - 1)];
  ++total_;
}

std::vector<double> RankHistogram::frequencies() const {
  std::vector<double> f(counts_.size(), 0.0);
  if (total_ == 0) return f;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    f[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
  }
  return f;
}

double RankHistogram::flatness() const {
  const double uniform = 1.0 / static_cast<double>(counts_.size());
  double delta = 0.0;
  for (double f : frequencies()) delta += std::abs(f - uniform);
  return delta;
}

double RankHistogram::chi_square() const {
  if (total_ == 0) return 0.0;
  const double expected = static_cast<double>(total_) / static_cast<double>(counts_.size());
  double stat = 0.0;
  for (long c : counts_) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

double RankHistogram::chi_square_p_value() const {
  return chi_square_sf(chi_square(), static_cast<double>(counts_.size() - 1));
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_q: need a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  constexpr int kMaxIter = 1000;
  constexpr double kEps = 1e-15;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    // Series for P(a, x).
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return std::max(0.0, 1.0 - sum * std::exp(log_prefix));
  }
  // Continued fraction for Q(a, x), modified Lentz.
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefix) * h;
}

double chi_square_sf(double statistic, double dof) {
  if (statistic <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

double quantile_score(double tau, double q, double y) {
  const double u = y - q;
  return u * (tau - (u < 0.0 ? 1.0 : 0.0));
}

namespace {

/// Lower empirical tau-quantile; minimises the summed pinball loss.
double empirical_quantile(std::vector<double> values, double tau) {
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto k = static_cast<std::size_t>(std::ceil(tau * n));
  k = std::clamp<std::size_t>(k, 1, values.size());
  return values[k - 1];
}

}  // namespace

QuantileScoreDecomposition decompose_quantile_score(const Eigen::VectorXd& forecasts,
                                                    const Eigen::VectorXd& observations,
                                                    double tau, int bins) {
  const Index n = forecasts.size();
  if (n == 0 || observations.size() != n) {
    throw std::invalid_argument("quantile score decomposition needs matching, non-empty inputs");
  }
  if (bins < 1) throw std::invalid_argument("bin count must be positive");
  if (bins > n) {
    log::warn("quantile score decomposition: " + std::to_string(n) + " cases for " +
              std::to_string(bins) + " bins; reducing bin count");
    bins = static_cast<int>(n);
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return forecasts(a) < forecasts(b); });

  const double climatology =
      empirical_quantile(std::vector<double>(observations.begin(), observations.end()), tau);

  QuantileScoreDecomposition out;
  double rel = 0.0;
  double res = 0.0;
  double unc = 0.0;
  double score = 0.0;
  std::size_t start = 0;
  for (int b = 1; b <= bins && start < order.size(); ++b) {
    auto stop = static_cast<std::size_t>((static_cast<long double>(b) * n) / bins);
    stop = std::max(stop, start + 1);
    while (stop < order.size() && forecasts(order[stop]) == forecasts(order[stop - 1])) ++stop;
    if (b == bins) stop = order.size();

    // Recalibrated forecast within the bin: the better of the bin's conditional
    // quantile and the forecasts shifted by the bin's residual quantile. Both
    // minimise the pinball sum over their family, so reliability (shift
    // includes zero) and resolution (climatology is a constant) stay >= 0.
    std::vector<double> ys;
    std::vector<double> residuals;
    for (std::size_t k = start; k < stop; ++k) {
      ys.push_back(observations(order[k]));
      residuals.push_back(observations(order[k]) - forecasts(order[k]));
    }
    const double conditional = empirical_quantile(ys, tau);
    const double shift = empirical_quantile(residuals, tau);
    double qs_const = 0.0;
    double qs_shift = 0.0;
    for (std::size_t k = start; k < stop; ++k) {
      const double y = observations(order[k]);
      qs_const += quantile_score(tau, conditional, y);
      qs_shift += quantile_score(tau, forecasts(order[k]) + shift, y);
    }
    const double qs_recal = std::min(qs_const, qs_shift);
    double qs_f = 0.0;
    double qs_clim = 0.0;
    for (std::size_t k = start; k < stop; ++k) {
      const double y = observations(order[k]);
      qs_f += quantile_score(tau, forecasts(order[k]), y);
      qs_clim += quantile_score(tau, climatology, y);
    }
    rel += qs_f - qs_recal;
    res += qs_clim - qs_recal;
    unc += qs_clim;
    score += qs_f;
    ++out.bins;
    start = stop;
  }
  const double nn = static_cast<double>(n);
  out.reliability = rel / nn;
  out.resolution = res / nn;
  out.uncertainty = unc / nn;
  out.score = score / nn;
  return out;
}

CrpsDecomposition crps_decomposition(const Eigen::MatrixXd& members,
                                     const Eigen::VectorXd& observations, int bins) {
  const Index cases = members.rows();
  const Index n = members.cols();
  if (cases == 0 || observations.size() != cases) {
    throw std::invalid_argument("crps_decomposition needs one observation per case");
  }
  if (cases < 100) {
    log::warn("crps_decomposition on " + std::to_string(cases) +
              " cases; the decomposition is a population statistic (>= 100 advised)");
  }
  Eigen::MatrixXd sorted = members;
  CrpsDecomposition out;
  double crps_sum = 0.0;
  for (Index k = 0; k < cases; ++k) {
    std::sort(sorted.row(k).begin(), sorted.row(k).end());
    crps_sum += crps_ensemble(members.row(k).transpose(), observations(k));
  }
  out.crps = crps_sum / static_cast<double>(cases);

  const Eigen::VectorXd tau = QuantileSet::levels(n);
  const double weight = 2.0 / static_cast<double>(n);
  for (Index level = 0; level < n; ++level) {
    const auto d = decompose_quantile_score(sorted.col(level), observations, tau(level), bins);
    out.reliability += weight * d.reliability;
    out.resolution += weight * d.resolution;
    out.uncertainty += weight * d.uncertainty;
    out.bins = std::max(out.bins, d.bins);
  }
  return out;
}

}  // namespace decc
