#include "decc/bootstrap.hpp"
#include "decc/log.hpp"
#include "decc/normal.hpp"
#include "decc/verification.hpp"

#include "doctest.h"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace decc;

namespace {

// Direct vectorised evaluations, written independently of the library loops.
double es_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(x.cols());
  const double to_obs = (x.colwise() - y).colwise().norm().sum() / n;
  double pair = 0.0;
  for (Index m = 0; m < x.cols(); ++m) pair += (x.colwise() - x.col(m)).colwise().norm().sum();
  return to_obs - pair / (2.0 * n * n);
}

double vs_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double p) {
  double total = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    for (Index j = 0; j < y.size(); ++j) {
      if (i == j) continue;
      const double w = 1.0 / std::pow(static_cast<double>(i - j), 2);
      const double fx = (x.row(i) - x.row(j)).array().abs().pow(p).mean();
      total += w * std::pow(std::pow(std::abs(y(i) - y(j)), p) - fx, 2);
    }
  }
  return total;
}

Eigen::MatrixXd normal_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Index k = 0; k < m.size(); ++k) m(k) = normal(rng);
  return m;
}

/// AR(1) trajectories with lag-1 correlation phi, one per column.
Eigen::MatrixXd ar1_paths(Index lead_count, Index count, double phi, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(lead_count, count);
  for (Index c = 0; c < count; ++c) {
    m(0, c) = normal(rng);
    for (Index t = 1; t < lead_count; ++t) m(t, c) = phi * m(t - 1, c) + std::sqrt(1 - phi * phi) * normal(rng);
  }
  return m;
}

ScoreTable table(const std::vector<double>& per_day, const std::string& kind = "s") {
  ScoreTable out;
  for (std::size_t d = 0; d < per_day.size(); ++d) {
    out.push_back({Date{2013, 1, 1} + static_cast<int>(d), "S01", kind, per_day[d]});
  }
  return out;
}

}  // namespace

TEST_CASE("energy score examples") {
  CHECK(energy_score((Eigen::MatrixXd(2, 1) << 3, 4).finished(), Eigen::Vector2d(0, 0)) == 5.0);
  CHECK(energy_score((Eigen::MatrixXd(2, 2) << 0, 2, 0, 0).finished(), Eigen::Vector2d(0, 0)) == 0.5);
  const Eigen::Vector3d y(1, 2, 3);
  CHECK(energy_score(y.replicate(1, 4), y) == 0.0);
  CHECK_THROWS_AS(energy_score(Eigen::MatrixXd::Ones(2, 2), Eigen::Vector3d::Ones()), std::invalid_argument);
}

TEST_CASE("variogram score examples and weights") {
  CHECK(variogram_score((Eigen::MatrixXd(2, 1) << 0, 0).finished(), Eigen::Vector2d(1, 3), 1.0) == 8.0);

  // Members with the observed increments score zero, whatever their level.
  const Eigen::Vector4d y(1, 4, 2, 6);
  Eigen::MatrixXd shifted(4, 3);
  shifted << y.array() + 1.0, y.array() + 5.0, y.array() - 0.5;
  CHECK(variogram_score(shifted, y, 1.0) == doctest::Approx(0.0).scale(1.0));

  // Equally spaced obs, flat member: lag-1 pairs weigh 1, the lag-2 pair 1/4.
  const Eigen::Vector3d ramp(0, 1, 2);
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(3, 1);
  const double lag1 = 4 * 1.0 * 1.0;        // (1,2),(2,1),(2,3),(3,2), each (1 - 0)^2
  const double lag2 = 2 * 0.25 * 2.0 * 2.0;  // (1,3),(3,1), each (2 - 0)^2 / 4
  CHECK(variogram_score(flat, ramp, 1.0) == lag1 + lag2);
  CHECK(lag2 / 2 / (2.0 * 2.0) * 4 == doctest::Approx(1.0));  // weight ratio 4:1

  CHECK_THROWS_AS(variogram_score(flat, ramp, 0.0), std::invalid_argument);
}

TEST_CASE("ES and pVS agree with direct evaluation") {
  Rng rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    const Index t = 1 + static_cast<Index>(rng() % 8);
    const Index n = 1 + static_cast<Index>(rng() % 10);
    const Eigen::MatrixXd x = normal_matrix(t, n, rng);
    const Eigen::VectorXd y = normal_matrix(t, 1, rng);
    const double es = energy_score(x, y);
    CHECK(std::abs(es - es_oracle(x, y)) <= 1e-12 * std::max(1.0, std::abs(es)));
    CHECK(es >= -1e-15);
    for (double p : {0.5, 1.0}) {
      const double vs = variogram_score(x, y, p);
      CHECK(std::abs(vs - vs_oracle(x, y, p)) <= 1e-12 * std::max(1.0, vs));
      CHECK(vs >= 0.0);
      // Adding one constant to every series leaves every increment alone.
      const Eigen::MatrixXd x2 = (x.array() + 3.25).matrix();
      const Eigen::VectorXd y2 = (y.array() + 3.25).matrix();
      CHECK(variogram_score(x2, y2, p) == doctest::Approx(vs).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("ensemble CRPS") {
  CHECK(crps_ensemble(Eigen::VectorXd::Constant(1, 4.0), 1.5) == 2.5);
  CHECK(crps_ensemble(Eigen::Vector2d(0, 2), 1.0) == 0.5);
  CHECK(crps_ensemble(Eigen::VectorXd::Constant(5, 3.0), 3.0) == 0.0);

  Rng rng(22);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 1 + static_cast<Index>(rng() % 20);
    const Eigen::MatrixXd x = normal_matrix(1, n, rng);
    const double y = normal_matrix(1, 1, rng)(0);
    CHECK(energy_score(x, Eigen::VectorXd::Constant(1, y)) == crps_ensemble(x.row(0).transpose(), y));
  }
}

TEST_CASE("multivariate rank examples") {
  Rng rng(23);
  Eigen::MatrixXd x(3, 4);
  x << 5, 6, 7, 8,  //
      5, 6, 7, 8,   //
      5, 6, 7, 8;
  CHECK(multivariate_rank(x, Eigen::Vector3d(0, 0, 0), HistogramKind::average_rank, rng) == 1);
  CHECK(multivariate_rank(x, Eigen::Vector3d(1, 1, 1), HistogramKind::band_depth, rng) <= 2);
  CHECK(multivariate_rank(x, Eigen::Vector3d(9, 9, 9), HistogramKind::average_rank, rng) == 5);
  // Above everything: depth 0, shared only with the lowest member.
  CHECK(multivariate_rank(x, Eigen::Vector3d(9, 9, 9), HistogramKind::band_depth, rng) <= 2);
  CHECK_THROWS(multivariate_rank(x, Eigen::Vector3d(0, 0, 0), HistogramKind::univariate, rng));
}

TEST_CASE("exchangeable ensembles give uniform multivariate histograms") {
  Rng rng(24);
  RankHistogram arh(HistogramKind::average_rank, 10);
  RankHistogram bdrh(HistogramKind::band_depth, 10);
  RankHistogram uni(HistogramKind::univariate, 10);
  for (int k = 0; k < 10000; ++k) {
    const Eigen::MatrixXd pool = ar1_paths(6, 11, 0.7, rng);
    const Eigen::VectorXd y = pool.col(0);
    const Eigen::MatrixXd x = pool.rightCols(10);
    arh.add(multivariate_rank(x, y, HistogramKind::average_rank, rng));
    bdrh.add(multivariate_rank(x, y, HistogramKind::band_depth, rng));
    uni.add(univariate_rank(x.row(2).transpose(), y(2), rng));
  }
  CHECK(arh.total() == 10000);
  CHECK(arh.chi_square_p_value() > 0.01);
  CHECK(bdrh.chi_square_p_value() > 0.01);
  CHECK(uni.chi_square_p_value() > 0.01);
}

TEST_CASE("band depth histogram is cap-shaped when members are too correlated") {
  Rng rng(25);
  RankHistogram good(HistogramKind::band_depth, 10);
  RankHistogram smooth(HistogramKind::band_depth, 10);
  for (int k = 0; k < 4000; ++k) {
    const Eigen::VectorXd y = ar1_paths(12, 1, 0.45, rng);
    good.add(multivariate_rank(ar1_paths(12, 10, 0.45, rng), y, HistogramKind::band_depth, rng));
    smooth.add(multivariate_rank(ar1_paths(12, 10, 0.9, rng), y, HistogramKind::band_depth, rng));
  }
  CHECK(smooth.flatness() > 2.0 * good.flatness());
  // Too-smooth members rarely bracket a rough observation as extreme: the
  // observation sits mid-depth and the histogram is a cap.
  const auto f = smooth.frequencies();
  const double edges = f[0] + f[10];
  const double mid = f[5] + f[6];
  CHECK(edges < mid);
}

TEST_CASE("rank histogram statistics") {
  RankHistogram h(HistogramKind::univariate, 3);
  for (int r : {1, 2, 3, 4, 1, 2, 3, 4}) h.add(r);
  CHECK(h.flatness() == 0.0);
  CHECK(h.chi_square() == 0.0);
  CHECK(h.chi_square_p_value() == doctest::Approx(1.0));
  CHECK_THROWS_AS(h.add(5), std::out_of_range);
  h.add(1);
  h.add(1);
  const auto f = h.frequencies();
  double sum = 0.0;
  for (double v : f) sum += std::abs(v - 0.25);
  CHECK(h.flatness() == doctest::Approx(sum));
}

TEST_CASE("incomplete gamma and chi-square tail match Boost.Math") {
  for (double a : {0.5, 1.0, 2.5, 10.0, 20.0, 75.0}) {
    for (double x : {0.0, 0.1, 1.0, 5.0, 20.0, 60.0, 150.0}) {
      CHECK(gamma_q(a, x) == doctest::Approx(boost::math::gamma_q(a, x)).epsilon(1e-10).scale(1e-300));
    }
  }
  for (double dof : {1.0, 5.0, 20.0}) {
    const boost::math::chi_squared_distribution<double> law(dof);
    for (double s : {0.5, 5.0, 30.0, 60.0}) {
      CHECK(chi_square_sf(s, dof) == doctest::Approx(boost::math::cdf(boost::math::complement(law, s))).epsilon(1e-10));
    }
  }
}

TEST_CASE("quantile score decomposition identity and limits") {
  Rng rng(26);
  std::normal_distribution<double> normal;
  const int n = 5000;
  Eigen::VectorXd mu(n);
  Eigen::VectorXd y(n);
  for (int k = 0; k < n; ++k) {
    mu(k) = 3.0 * normal(rng);
    y(k) = mu(k) + normal(rng);
  }
  const double tau = 0.8;
  const Eigen::VectorXd q = (mu.array() + normal_quantile(tau)).matrix();
  const auto d = decompose_quantile_score(q, y, tau);
  double direct = 0.0;
  for (int k = 0; k < n; ++k) direct += quantile_score(tau, q(k), y(k));
  CHECK(d.score == doctest::Approx(direct / n).epsilon(1e-12));
  CHECK(d.reliability - d.resolution + d.uncertainty == doctest::Approx(d.score).epsilon(1e-9));
  CHECK(d.reliability >= -1e-12);
  CHECK(d.resolution >= -1e-12);
  CHECK(d.bins == 10);
  CHECK(d.reliability < 0.05 * d.score);

  // A constant forecast cannot discriminate between cases.
  const Eigen::VectorXd clim = Eigen::VectorXd::Constant(n, 1.0);
  CHECK(decompose_quantile_score(clim, y, tau).resolution == doctest::Approx(0.0).scale(1.0));
  CHECK(quantile_score(0.25, 1.0, 3.0) == 0.5);
  CHECK(quantile_score(0.25, 3.0, 1.0) == 1.5);
}

TEST_CASE("CRPS decomposition") {
  Rng rng(27);
  std::normal_distribution<double> normal;
  const int cases = 5000;
  const int members = 20;
  Eigen::MatrixXd x(cases, members);
  Eigen::VectorXd y(cases);
  for (int k = 0; k < cases; ++k) {
    const double mu = 5.0 + 2.0 * normal(rng);
    for (int i = 0; i < members; ++i) x(k, i) = mu + normal(rng);
    y(k) = mu + normal(rng);
  }
  const auto d = crps_decomposition(x, y);
  double mean_crps = 0.0;
  for (int k = 0; k < cases; ++k) mean_crps += crps_ensemble(x.row(k).transpose(), y(k));
  mean_crps /= cases;
  CHECK(d.crps == doctest::Approx(mean_crps).epsilon(1e-12));
  CHECK(std::abs(d.reliability - d.resolution + d.uncertainty - d.crps) < 0.05 * d.crps);
  CHECK(d.reliability < 0.05 * d.crps);
  CHECK(d.resolution > 0.0);

  // Climatological forecasts: the same sorted ensemble every case.
  Eigen::MatrixXd clim(cases, members);
  for (int i = 0; i < members; ++i) clim.col(i).setConstant(5.0 + 2.2 * normal_quantile((i + 1.0) / 21.0));
  CHECK(crps_decomposition(clim, y).resolution == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("decompositions reduce the bin count on small samples") {
  std::vector<std::string> warnings;
  log::ScopedSink sink([&](std::string_view m) { warnings.emplace_back(m); });
  const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(6, 0, 5);
  const auto d = decompose_quantile_score(f, f, 0.5, 10);
  CHECK(d.bins <= 6);
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("block bootstrap") {
  SUBCASE("constant scores") {
    const auto s = block_bootstrap(table(std::vector<double>(30, 2.5)), 200, 1);
    for (double q : s.at("s").quantiles) CHECK(q == 2.5);
    CHECK(s.replicates == 200);
    CHECK(s.days == 30);
  }
  SUBCASE("two days") {
    const auto s = block_bootstrap(table({0.0, 1.0}), 4000, 2);
    const auto& q = s.at("s").quantiles;
    CHECK(q[0] == 0.0);
    CHECK(q[2] == 0.5);
    CHECK(q[4] == 1.0);
  }
  SUBCASE("determinism and monotone quantiles") {
    Rng rng(3);
    std::vector<double> v(60);
    for (auto& x : v) x = std::exponential_distribution<double>(1.0)(rng);
    const auto a = block_bootstrap(table(v), 500, 99);
    const auto b = block_bootstrap(table(v), 500, 99);
    CHECK(a.at("s").replicate_means == b.at("s").replicate_means);
    const auto& q = a.at("s").quantiles;
    for (std::size_t k = 1; k < q.size(); ++k) CHECK(q[k - 1] <= q[k]);
  }
  SUBCASE("replicate variance shrinks like 1/days") {
    Rng rng(4);
    std::normal_distribution<double> normal;
    const auto variance = [&](int days) {
      std::vector<double> v(static_cast<std::size_t>(days));
      for (auto& x : v) x = normal(rng);
      const auto& means = block_bootstrap(table(v), 2000, 5).at("s").replicate_means;
      const Eigen::Map<const Eigen::VectorXd> m(means.data(), static_cast<Index>(means.size()));
      return (m.array() - m.mean()).square().mean();
    };
    const double ratio = variance(50) / variance(400);
    CHECK(ratio > 4.0);
    CHECK(ratio < 16.0);
  }
  SUBCASE("records of one day move together") {
    ScoreTable t = table({0.0, 1.0});
    auto extra = table({0.0, 1.0});
    t.insert(t.end(), extra.begin(), extra.end());
    const auto s = block_bootstrap(t, 300, 6);
    for (double m : s.at("s").replicate_means) CHECK((m == 0.0 || m == 0.5 || m == 1.0));
  }
  SUBCASE("paired comparisons share the draws") {
    ScoreTable t = table({1, 2, 3, 4, 5, 6}, "a");
    auto b = table({1.5, 2.5, 3.5, 4.5, 5.5, 6.5}, "b");
    t.insert(t.end(), b.begin(), b.end());
    const auto s = block_bootstrap(t, 300, 7);
    CHECK(s.fraction_below("a", "b") == 1.0);
    CHECK(s.fraction_below("b", "a") == 0.0);
  }
  CHECK_THROWS_AS(block_bootstrap(table({1.0}), 10, 1), std::invalid_argument);
}

TEST_CASE("sample quantiles interpolate linearly") {
  CHECK(sample_quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(sample_quantile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(sample_quantile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(sample_quantile({0, 10}, 0.25) == 2.5);
}
