#include "decc/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace decc {
namespace {

template <typename Row>
void rank_into(const Row& row, TiePolicy policy, Rng* rng, Eigen::Ref<Eigen::VectorXi> out) {
  const Index n = row.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return row(a) < row(b); });
  if (policy == TiePolicy::random) {
    for (auto first = order.begin(); first != order.end();) {
      auto last = std::find_if(first, order.end(),
                               [&](Index k) { return row(k) != row(*first); });
      if (last - first > 1) {
        std::shuffle(first, last, *rng);
      }
      first = last;
    }
  }
  for (Index pos = 0; pos < n; ++pos) {
    out(order[static_cast<std::size_t>(pos)]) = static_cast<int>(pos + 1);
  }
}

}  // namespace

RankMatrix compute_ranks(const Eigen::MatrixXd& z, TiePolicy policy, Rng& rng) {
  for (Index t = 0; t < z.rows(); ++t) {
    for (Index i = 0; i < z.cols(); ++i) {
      if (!std::isfinite(z(t, i))) {
        throw std::invalid_argument("non-finite template value at row " + std::to_string(t) +
                                    ", column " + std::to_string(i));
      }
    }
  }
  RankMatrix result{Eigen::MatrixXi(z.rows(), z.cols()), policy};
  Eigen::VectorXi row_ranks(z.cols());
  for (Index t = 0; t < z.rows(); ++t) {
    rank_into(z.row(t).transpose(), policy, &rng, row_ranks);
    result.ranks.row(t) = row_ranks.transpose();
  }
  return result;
}

RankMatrix compute_ranks(const Eigen::MatrixXd& z) {
  Rng unused{0};
  return compute_ranks(z, TiePolicy::first_occurrence, unused);
}

Eigen::VectorXi rank_vector(const Eigen::Ref<const Eigen::VectorXd>& values, TiePolicy policy,
                            Rng& rng) {
  Eigen::VectorXi out(values.size());
  rank_into(values, policy, &rng, out);
  return out;
}

Eigen::VectorXd ensemble_mean(const EnsembleForecast& f) { return f.members().rowwise().mean(); }

Eigen::VectorXd ensemble_variance(const EnsembleForecast& f) {
  const Index n = f.member_count();
  if (n < 2) {
    return Eigen::VectorXd::Zero(f.lead_count());
  }
  const Eigen::MatrixXd centered = f.members().colwise() - ensemble_mean(f);
  return centered.rowwise().squaredNorm() / static_cast<double>(n - 1);
}

}  // namespace decc
