#include "decc/copula.hpp"
#include "decc/log.hpp"
#include "decc/ranks.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using namespace decc;

namespace {

EnsembleForecast forecast_with(const Eigen::MatrixXd& members) {
  std::vector<int> leads(static_cast<std::size_t>(members.rows()));
  std::iota(leads.begin(), leads.end(), 1);
  return EnsembleForecast(Date{2013, 3, 1}, "S01", leads, members);
}

Eigen::MatrixXd sorted_rows(Eigen::MatrixXd m) {
  for (Index t = 0; t < m.rows(); ++t) std::sort(m.row(t).begin(), m.row(t).end());
  return m;
}

Eigen::MatrixXd random_members(Index lead_count, Index n, Rng& rng, double scale = 1.0) {
  std::gamma_distribution<double> wind(4.0, 2.0 * scale);
  Eigen::MatrixXd m(lead_count, n);
  for (Index k = 0; k < m.size(); ++k) m(k) = wind(rng);
  return m;
}

/// Calibrated-looking quantiles: sorted, wider than the raw spread, some floored.
QuantileSet random_quantiles(Index lead_count, Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd q(lead_count, n);
  for (Index k = 0; k < q.size(); ++k) q(k) = std::max(0.0, 3.0 + 4.0 * normal(rng));
  return QuantileSet(sorted_rows(q));
}

ErrorCorrelationMatrix ar1_correlation(Index lead_count, double phi) {
  Eigen::MatrixXd r(lead_count, lead_count);
  for (Index i = 0; i < lead_count; ++i) {
    for (Index j = 0; j < lead_count; ++j) r(i, j) = std::pow(phi, std::abs(static_cast<double>(i - j)));
  }
  return ErrorCorrelationMatrix(linalg::SymmetricMatrix<double>(r));
}

TrainingWindow window_from_errors(const Eigen::MatrixXd& errors) {
  TrainingWindow w{Date{2020, 1, 1}, static_cast<int>(errors.rows()), {}};
  const Index lead_count = errors.cols();
  for (Index d = 0; d < errors.rows(); ++d) {
    const Eigen::VectorXd mean = Eigen::VectorXd::Constant(lead_count, 10.0);
    w.cases.push_back({Date{2000, 1, 1} + static_cast<int>(d), mean,
                       Eigen::VectorXd::Ones(lead_count), mean + errors.row(d).transpose()});
  }
  return w;
}

Eigen::MatrixXd ar1_errors(Index days, Index lead_count, double phi, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd e(days, lead_count);
  for (Index d = 0; d < days; ++d) {
    e(d, 0) = normal(rng);
    for (Index t = 1; t < lead_count; ++t) {
      e(d, t) = phi * e(d, t - 1) + std::sqrt(1.0 - phi * phi) * normal(rng);
    }
  }
  return e;
}

}  // namespace

TEST_CASE("reorder hands out quantiles by rank") {
  Eigen::MatrixXd raw(1, 3);
  raw << 5, 2, 3;
  Eigen::MatrixXd qv(1, 3);
  qv << 10, 20, 30;
  const auto out = reorder(QuantileSet(qv), compute_ranks(raw), Provenance::ecc);
  CHECK(out.values() == (Eigen::MatrixXd(1, 3) << 30, 10, 20).finished());
  CHECK(out.provenance() == Provenance::ecc);
}

TEST_CASE("ecc hand-checked example with ties") {
  Eigen::MatrixXd raw(2, 3);
  raw << 5, 1, 3,  //
      2, 4, 3;
  Eigen::MatrixXd qv(2, 3);
  qv << 10, 20, 30,  //
      10, 20, 30;
  Rng rng(1);
  const auto out = ecc(QuantileSet(qv), forecast_with(raw), rng, TiePolicy::first_occurrence);
  Eigen::MatrixXd expected(2, 3);
  expected << 30, 10, 20,  //
      10, 30, 20;
  CHECK(out.values() == expected);
}

TEST_CASE("ecc with sorted raw quantiles returns the raw ensemble") {
  Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd raw = random_members(6, 10, rng);
    const auto out = ecc(QuantileSet(sorted_rows(raw)), forecast_with(raw), rng);
    CHECK(out.values() == raw);
  }
}

TEST_CASE("ecc rejects mismatched shapes") {
  Rng rng(3);
  const auto f = forecast_with(random_members(3, 4, rng));
  CHECK_THROWS_AS(ecc(QuantileSet(Eigen::MatrixXd::Zero(3, 5)), f, rng), std::invalid_argument);
  CHECK_THROWS_AS(ecc(QuantileSet(Eigen::MatrixXd::Zero(2, 4)), f, rng), std::invalid_argument);
  CHECK_THROWS_AS(decc::decc(QuantileSet(Eigen::MatrixXd::Zero(3, 4)), f, ErrorCorrelationMatrix::identity(4), rng),
                  std::invalid_argument);
}

TEST_CASE("coupling preserves marginals and ecc preserves raw ranks") {
  Rng rng(4);
  const auto re = ar1_correlation(8, 0.7);
  std::vector<Eigen::VectorXd> history;
  for (int k = 0; k < 40; ++k) history.push_back(random_members(8, 1, rng).col(0));
  for (int rep = 0; rep < 200; ++rep) {
    const auto raw = forecast_with(random_members(8, 12, rng));
    const auto q = random_quantiles(8, 12, rng);
    const auto e = ecc(q, raw, rng);
    const auto d = decc::decc(q, raw, re, rng);
    const auto c = climatological_template(q, history, rng);
    for (const auto* s : {&e, &d, &c}) CHECK(sorted_rows(s->values()) == q.values());
    CHECK(compute_ranks(raw.members()).ranks ==
          compute_ranks(ecc(QuantileSet(sorted_rows(random_members(8, 12, rng))), raw, rng).values())
              .ranks);
  }
}

TEST_CASE("d-ECC reductions") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto raw = forecast_with(random_members(10, 15, rng));
    const auto q = random_quantiles(10, 15, rng);
    const auto re = ar1_correlation(10, 0.4 + 0.5 * std::uniform_real_distribution<double>()(rng));

    // R_e = I reduces to ECC.
    Rng a(rep);
    Rng b(rep);
    CHECK(decc::decc(q, raw, ErrorCorrelationMatrix::identity(10), a).values() == ecc(q, raw, b).values());

    // c = 0 returns the raw ensemble.
    const QuantileSet identity_q(sorted_rows(raw.members()));
    const auto steps = decc_steps(identity_q, raw, re, rng);
    CHECK((steps.corrections.values.array() == 0.0).all());
    CHECK(steps.scenarios.values() == raw.members());

    // c = h J: a pure shift keeps the ECC ordering.
    const QuantileSet shifted((sorted_rows(raw.members()).array() + 1.5).matrix());
    const auto shift_steps = decc_steps(shifted, raw, re, rng);
    CHECK((shift_steps.corrections.values.array() - 1.5).abs().maxCoeff() < 1e-12);
    CHECK(shift_steps.scenarios.values() == ecc(shifted, raw, rng).values());
  }
}

TEST_CASE("d-ECC intermediate steps follow the recipe") {
  Rng rng(6);
  const auto raw = forecast_with(random_members(6, 8, rng));
  const auto q = random_quantiles(6, 8, rng);
  const auto re = ar1_correlation(6, 0.8);
  const auto s = decc_steps(q, raw, re, rng);
  CHECK(s.corrections.values == s.ecc.values() - raw.members());
  const Eigen::MatrixXd root = linalg::sqrt_psd(re.symmetric()).matrix();
  CHECK((s.adjusted_corrections - root * s.corrections.values).norm() < 1e-12);
  CHECK((s.adjusted.values - (raw.members() + s.adjusted_corrections)).norm() < 1e-12);
  CHECK(s.adjusted.source == TemplateSource::adjusted_ensemble);
  CHECK(s.scenarios.values() == reorder(q, s.adjusted.ranks, Provenance::decc).values());
  CHECK(s.scenarios.provenance() == Provenance::decc);
}

TEST_CASE("d-ECC is equivariant under member relabelling") {
  Rng rng(7);
  const auto re = ar1_correlation(7, 0.7);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd x = random_members(7, 9, rng);
    const auto q = random_quantiles(7, 9, rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(9);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 9, rng);
    // Continuous inputs: no ties, so the random generator is never consulted.
    Rng unused(0);
    const Eigen::MatrixXd base = decc::decc(q, forecast_with(x), re, unused).values();
    const Eigen::MatrixXd relabelled = decc::decc(q, forecast_with(x * perm), re, unused).values();
    CHECK(relabelled == base * perm);
  }
}

TEST_CASE("adjusted corrections are bounded by the largest eigenvalue") {
  Rng rng(8);
  const auto re = ar1_correlation(12, 0.9);
  const double bound = std::sqrt(linalg::eigh(re.symmetric()).values.maxCoeff());
  for (int rep = 0; rep < 50; ++rep) {
    const auto raw = forecast_with(random_members(12, 10, rng));
    const auto s = decc_steps(random_quantiles(12, 10, rng), raw, re, rng);
    for (Index i = 0; i < 10; ++i) {
      CHECK(s.adjusted_corrections.col(i).norm() <= s.corrections.values.col(i).norm() * bound + 1e-9);
    }
  }
}

TEST_CASE("a non-PSD correlation matrix is rejected by d-ECC") {
  Eigen::Matrix3d r;
  r << 1, 0.9, -0.9,  //
      0.9, 1, 0.9,    //
      -0.9, 0.9, 1;
  const ErrorCorrelationMatrix bad{linalg::SymmetricMatrix<double>(r)};
  Rng rng(9);
  const auto raw = forecast_with(random_members(3, 4, rng));
  CHECK_THROWS_AS(decc::decc(random_quantiles(3, 4, rng), raw, bad, rng), std::domain_error);
}

TEST_CASE("error correlation matrices validate their entries") {
  Eigen::Matrix2d r;
  r << 1, 0.5, 0.5, 0.9;
  CHECK_THROWS_AS(ErrorCorrelationMatrix{linalg::SymmetricMatrix<double>(r)}, std::invalid_argument);
  r << 1, 1.5, 1.5, 1;
  CHECK_THROWS_AS(ErrorCorrelationMatrix{linalg::SymmetricMatrix<double>(r)}, std::invalid_argument);
  CHECK(ErrorCorrelationMatrix::identity(3).lagged_correlation() == Eigen::Vector2d::Zero());
  CHECK(ar1_correlation(4, 0.5).lagged_correlation().isApprox(Eigen::Vector3d(0.5, 0.25, 0.125)));
}

TEST_CASE("error correlation estimates") {
  Rng rng(10);
  log::ScopedSink quiet([](std::string_view) {});

  SUBCASE("independent errors give near-zero off-diagonals") {
    const auto re = estimate_error_correlation(window_from_errors(ar1_errors(5000, 6, 0.0, rng)));
    const Eigen::MatrixXd off = re.matrix() - Eigen::MatrixXd::Identity(6, 6);
    CHECK(off.cwiseAbs().maxCoeff() < 0.05);
    CHECK(re.pair_counts()(0, 5) == 5000);
  }
  SUBCASE("AR(1) errors recover the lag structure") {
    const auto re = estimate_error_correlation(window_from_errors(ar1_errors(5000, 21, 0.7, rng)));
    const Eigen::VectorXd lags = re.lagged_correlation();
    CHECK(std::abs(lags(0) - 0.7) < 0.05);
    for (Index k = 1; k < lags.size(); ++k) CHECK(lags(k) <= lags(k - 1) + 0.02);
    CHECK(lags(0) > lags(4));
    CHECK(lags(4) > lags(9));
  }
}

TEST_CASE("degenerate and data-poor correlation entries") {
  Rng rng(11);
  std::vector<std::string> warnings;
  log::ScopedSink sink([&](std::string_view m) { warnings.emplace_back(m); });

  Eigen::MatrixXd e = ar1_errors(40, 3, 0.8, rng);
  e.col(2).setConstant(0.25);
  const auto re = estimate_error_correlation(window_from_errors(e));
  CHECK(re.matrix()(0, 2) == 0.0);
  CHECK(re.matrix()(1, 2) == 0.0);
  CHECK(re.matrix()(2, 2) == 1.0);
  REQUIRE_FALSE(warnings.empty());
  CHECK(warnings.front().find("undefined") != std::string::npos);

  // Pairwise deletion: lead 3 observed on only 10 days, so its entries shrink by 10/15.
  warnings.clear();
  Eigen::MatrixXd f = ar1_errors(40, 3, 0.8, rng);
  auto window = window_from_errors(f);
  for (std::size_t d = 10; d < window.cases.size(); ++d) {
    window.cases[d].observed(2) = std::numeric_limits<double>::quiet_NaN();
  }
  const auto shrunk = estimate_error_correlation(window);
  CHECK(shrunk.pair_counts()(1, 2) == 10);
  CHECK(shrunk.pair_counts()(0, 1) == 40);
  const auto full = linalg::pearson(Eigen::VectorXd(f.block(0, 1, 10, 1)), Eigen::VectorXd(f.block(0, 2, 10, 1)));
  REQUIRE(full.has_value());
  if (!shrunk.repaired()) CHECK(shrunk.matrix()(1, 2) == doctest::Approx(*full * 10.0 / 15.0));
  CHECK(std::any_of(warnings.begin(), warnings.end(),
                    [](const std::string& w) { return w.find("shrunk") != std::string::npos; }));
}

TEST_CASE("climatological template") {
  Rng rng(12);
  Eigen::MatrixXd qv(2, 2);
  qv << 10, 20,  //
      10, 20;
  const QuantileSet q(qv);

  std::vector<Eigen::VectorXd> history{Eigen::Vector2d(1, 5), Eigen::Vector2d(4, 2)};
  const auto out = climatological_template(q, history, rng);
  Eigen::MatrixXd expected(2, 2);
  expected << 10, 20,  //
      20, 10;
  CHECK(out.values() == expected);
  CHECK(out.provenance() == Provenance::climatological_template);

  // Exactly N trajectories: the seed does not matter.
  Rng other(99);
  CHECK(climatological_template(q, history, other).values() == expected);

  history.pop_back();
  CHECK_THROWS_AS(climatological_template(q, history, rng), std::invalid_argument);

  // Increasing histories give increasing scenarios.
  std::vector<Eigen::VectorXd> increasing;
  for (int k = 0; k < 30; ++k) {
    Eigen::VectorXd h(6);
    double v = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
    for (Index t = 0; t < 6; ++t) h(t) = (v += std::uniform_real_distribution<double>(0.1, 1.0)(rng));
    increasing.push_back(h);
  }
  Eigen::MatrixXd qs(6, 10);
  for (Index t = 0; t < 6; ++t) {
    for (Index i = 0; i < 10; ++i) qs(t, i) = static_cast<double>(t) + 0.05 * static_cast<double>(i);
  }
  const auto inc = climatological_template(QuantileSet(qs), increasing, rng);
  for (Index i = 0; i < 10; ++i) {
    for (Index t = 1; t < 6; ++t) CHECK(inc.values()(t, i) > inc.values()(t - 1, i));
  }
}

TEST_CASE("climatological template from observation series skips incomplete days") {
  ObservationSeries obs("S01", {1, 2});
  obs.insert(Date{2013, 1, 1}, Eigen::Vector2d(1, 5));
  obs.insert(Date{2013, 1, 2}, Eigen::Vector2d(4, std::numeric_limits<double>::quiet_NaN()));
  obs.insert(Date{2013, 1, 3}, Eigen::Vector2d(4, 2));
  Rng rng(13);
  const QuantileSet q((Eigen::MatrixXd(2, 2) << 10, 20, 10, 20).finished());
  const auto out = climatological_template(q, std::vector<ObservationSeries>{obs}, rng);
  CHECK(out.values() == (Eigen::MatrixXd(2, 2) << 10, 20, 20, 10).finished());
}

TEST_CASE("covariance decomposition") {
  Rng rng(14);
  const auto raw = forecast_with(random_members(4, 20, rng));
  const Eigen::MatrixXd& x = raw.members();
  const auto cov = [](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    return ((a.array() - a.mean()) * (b.array() - b.mean())).sum() / static_cast<double>(a.size() - 1);
  };

  const auto zero = covariance_decomposition(raw, CorrectionSet{Eigen::MatrixXd::Zero(4, 20)}, 0, 2);
  CHECK(zero.correction_term == 0.0);
  CHECK(zero.epsilon == 0.0);
  CHECK(zero.raw_term == zero.total);
  CHECK(zero.total == doctest::Approx(cov(x.row(0), x.row(2))));
  CHECK(zero.correction_degenerate);

  const auto flat = forecast_with(Eigen::MatrixXd::Constant(4, 20, 6.0));
  const auto c = CorrectionSet{random_members(4, 20, rng)};
  const auto terms = covariance_decomposition(flat, c, 1, 3);
  CHECK(terms.raw_term == 0.0);
  CHECK(terms.raw_degenerate);

  // Cross terms: epsilon is cov(x1, c2) + cov(c1, x2).
  const auto general = covariance_decomposition(raw, c, 1, 3);
  const double cross = cov(x.row(1), c.values.row(3)) + cov(c.values.row(1), x.row(3));
  CHECK(general.epsilon == doctest::Approx(cross).epsilon(1e-10));

  CHECK_THROWS_AS(covariance_decomposition(raw, c, 1, 1), std::invalid_argument);
}

TEST_CASE("independent raw members and corrections give a vanishing cross term") {
  Rng rng(15);
  const Index n = 10000;
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(2, n);
  Eigen::MatrixXd c(2, n);
  for (Index i = 0; i < n; ++i) {
    const double a = normal(rng);
    x(0, i) = 10.0 + a;
    x(1, i) = 10.0 + 0.6 * a + 0.8 * normal(rng);
    const double b = normal(rng);
    c(0, i) = b;
    c(1, i) = 0.5 * b + normal(rng);
  }
  const auto terms = covariance_decomposition(forecast_with(x), CorrectionSet{c}, 0, 1);
  // Each cross covariance has standard error about sd_x sd_c / sqrt(n).
  const double se = std::sqrt(2.0) * 1.0 * 1.12 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(terms.epsilon) < 3.0 * se);
}
