#pragma once

#include "decc/types.hpp"

namespace decc {

/// Row-wise ranks of a T x N template: rank 1 is the smallest value of a row.
/// Without ties this is the count of entries <= the value. Ties are split
/// either at random or in column order. Throws std::invalid_argument naming the
/// first non-finite cell.
RankMatrix compute_ranks(const Eigen::MatrixXd& z, TiePolicy policy, Rng& rng);
RankMatrix compute_ranks(const Eigen::MatrixXd& z);

/// Ranks of a single vector (1-based).
Eigen::VectorXi rank_vector(const Eigen::Ref<const Eigen::VectorXd>& values, TiePolicy policy,
                            Rng& rng);

Eigen::VectorXd ensemble_mean(const EnsembleForecast& f);

/// Unbiased (N-1) member variance per lead time; zero for a single member.
Eigen::VectorXd ensemble_variance(const EnsembleForecast& f);

}  // namespace decc
