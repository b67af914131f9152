#pragma once

#include "decc/dataset.hpp"
#include "decc/linalg.hpp"
#include "decc/types.hpp"

#include <vector>

namespace decc {

enum class TemplateSource { raw_ensemble, adjusted_ensemble, climatology };

/// Dependence template: T x N values and their row-wise ranks.
struct Template {
  Eigen::MatrixXd values;
  RankMatrix ranks;
  TemplateSource source = TemplateSource::raw_ensemble;
};

Template make_template(Eigen::MatrixXd values, TemplateSource source, TiePolicy ties, Rng& rng);

/// Member i at lead t receives q_t^{R_t^i}. Output values are copied from q
/// without arithmetic, so every row is a permutation of the quantile row.
ScenarioSet reorder(const QuantileSet& q, const RankMatrix& ranks, Provenance provenance);

ScenarioSet ecc(const QuantileSet& q, const EnsembleForecast& raw, Rng& rng,
                TiePolicy ties = TiePolicy::random);

/// Per-member differences between post-processed and raw trajectories.
struct CorrectionSet {
  Eigen::MatrixXd values;  ///< T x N, c_t^i = xtilde_t^i - x_t^i
};

/// Temporal correlation of the ensemble-mean error y_t - m(x_t), estimated over
/// a training window.
class ErrorCorrelationMatrix {
public:
  explicit ErrorCorrelationMatrix(linalg::SymmetricMatrix<double> matrix,
                                  Eigen::MatrixXi pair_counts = {}, bool repaired = false);

  static ErrorCorrelationMatrix identity(Index lead_count);

  const linalg::SymmetricMatrix<double>& symmetric() const { return matrix_; }
  const Eigen::MatrixXd& matrix() const { return matrix_.matrix(); }
  const Eigen::MatrixXi& pair_counts() const { return pair_counts_; }
  bool repaired() const { return repaired_; }
  Index lead_count() const { return matrix_.dim(); }

  /// Mean of the entries with |t1 - t2| = k, for k = 1..T-1 (index k-1).
  Eigen::VectorXd lagged_correlation() const;

private:
  linalg::SymmetricMatrix<double> matrix_;
  Eigen::MatrixXi pair_counts_;
  bool repaired_ = false;
};

struct CorrelationOptions {
  int min_pairs = 15;
  double eigenvalue_floor = 1e-8;
};

/// Pearson correlation of ensemble-mean errors with pairwise deletion of
/// missing observations. Undefined entries become 0, entries backed by fewer
/// than min_pairs days are shrunk by n/min_pairs, and the result is repaired
/// to a positive semidefinite unit-diagonal matrix.
ErrorCorrelationMatrix estimate_error_correlation(const TrainingWindow& window,
                                                  CorrelationOptions options = {});

/// Intermediate products of dual ensemble copula coupling.
struct DeccSteps {
  ScenarioSet ecc;                        ///< step 1
  CorrectionSet corrections;              ///< step 2
  Eigen::MatrixXd adjusted_corrections;   ///< step 3, R_e^{1/2} c^i
  Template adjusted;                      ///< step 4, x^i + adjusted c^i
  ScenarioSet scenarios;                  ///< step 5
};

DeccSteps decc_steps(const QuantileSet& q, const EnsembleForecast& raw,
                     const ErrorCorrelationMatrix& re, Rng& rng,
                     TiePolicy ties = TiePolicy::random);

ScenarioSet decc(const QuantileSet& q, const EnsembleForecast& raw,
                 const ErrorCorrelationMatrix& re, Rng& rng, TiePolicy ties = TiePolicy::random);

/// Schaake-style baseline: N complete historical trajectories drawn uniformly
/// without replacement (original order kept) form the template.
ScenarioSet climatological_template(const QuantileSet& q,
                                    const std::vector<Eigen::VectorXd>& history, Rng& rng,
                                    TiePolicy ties = TiePolicy::random);
ScenarioSet climatological_template(const QuantileSet& q,
                                    const std::vector<ObservationSeries>& history, Rng& rng,
                                    TiePolicy ties = TiePolicy::random);

struct CovarianceTerms {
  double total = 0.0;            ///< k_hat of xtilde = x + c
  double raw_term = 0.0;         ///< rho_x sigma_x sigma_x
  double correction_term = 0.0;  ///< rho_c sigma_c sigma_c
  double epsilon = 0.0;          ///< cross covariances of x and c
  bool raw_degenerate = false;
  bool correction_degenerate = false;
};

/// Splits the member covariance of x + c between two distinct lead times
/// (0-based rows) into raw, correction and cross terms, all with N-1
/// normalisation.
CovarianceTerms covariance_decomposition(const EnsembleForecast& raw, const CorrectionSet& c,
                                         Index t1, Index t2);

}  // namespace decc
