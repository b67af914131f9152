#pragma once

#include "decc/types.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace decc {

/// Energy score of T x N scenarios (columns) against an observed trajectory.
double energy_score(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs);

/// p-variogram score with weights 1/(i-j)^2 summed over ordered pairs i != j.
double variogram_score(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs, double p);

/// Ensemble CRPS in kernel form: mean|x - y| - 1/(2N^2) sum |x_m - x_p|.
double crps_ensemble(const Eigen::VectorXd& members, double y);

enum class HistogramKind { univariate, average_rank, band_depth };

std::string_view to_string(HistogramKind kind);

/// Rank of the observation among N members at one lead time (1..N+1),
/// ties split at random.
int univariate_rank(const Eigen::VectorXd& members, double y, Rng& rng);

/// Multivariate rank (1..N+1) of the observed trajectory. The observation is
/// pooled with the members, each series gets a pre-rank (mean univariate rank
/// or mean band depth (K - R_t)(R_t - 1)) and the observation's pre-rank is
/// ranked among all K = N + 1, ties split at random.
int multivariate_rank(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& obs,
                      HistogramKind kind, Rng& rng);

class RankHistogram {
public:
  RankHistogram(HistogramKind kind, Index member_count);

  void add(int rank);

  HistogramKind kind() const { return kind_; }
  const std::vector<long>& counts() const { return counts_; }
  long total() const { return total_; }
  std::vector<double> frequencies() const;

  /// Sum over bins of |f_k - 1/(N+1)|.
  double flatness() const;
  double chi_square() const;
  /// Upper-tail p-value of the chi-square uniformity test (N degrees of freedom).
  double chi_square_p_value() const;

private:
  HistogramKind kind_;
  std::vector<long> counts_;
  long total_ = 0;
};

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// P(X >= statistic) for X ~ chi-square(dof).
double chi_square_sf(double statistic, double dof);

/// Pinball loss rho_tau(y - q).
double quantile_score(double tau, double q, double y);

struct QuantileScoreDecomposition {
  double score = 0.0;  ///< mean QS of the forecasts
  double reliability = 0.0;
  double resolution = 0.0;
  double uncertainty = 0.0;
  int bins = 0;
};

/// Quantile score decomposition over equally populated forecast bins; equal
/// forecast values never straddle a bin boundary. Within a bin the recalibrated
/// forecast is the better of the conditional observed tau-quantile and the
/// forecasts shifted by the tau-quantile of their residuals. Reliability is
/// QS(forecast) - QS(recalibrated), resolution QS(climatology) - QS(recalibrated),
/// so both are >= 0 and score == reliability - resolution + uncertainty exactly.
QuantileScoreDecomposition decompose_quantile_score(const Eigen::VectorXd& forecasts,
                                                    const Eigen::VectorXd& observations,
                                                    double tau, int bins = 10);

struct CrpsDecomposition {
  double crps = 0.0;  ///< mean ensemble CRPS (kernel form)
  double reliability = 0.0;
  double resolution = 0.0;
  double uncertainty = 0.0;
  int bins = 0;
};

/// CRPS reliability/resolution/uncertainty as 2/N-weighted sums of the
/// quantile-score components at levels n/(N+1), the n-th sorted member being
/// the forecast at level n. `members` is cases x N.
CrpsDecomposition crps_decomposition(const Eigen::MatrixXd& members,
                                     const Eigen::VectorXd& observations, int bins = 10);

}  // namespace decc
