#include "decc/copula.hpp"

#include "decc/log.hpp"
#include "decc/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <sstream>

namespace decc {

Template make_template(Eigen::MatrixXd values, TemplateSource source, TiePolicy ties, Rng& rng) {
  RankMatrix ranks = compute_ranks(values, ties, rng);
  return {std::move(values), std::move(ranks), source};
}

ScenarioSet reorder(const QuantileSet& q, const RankMatrix& ranks, Provenance provenance) {
  if (ranks.ranks.rows() != q.lead_count() || ranks.ranks.cols() != q.member_count()) {
    throw std::invalid_argument("reorder: template and quantile set differ in shape");
  }
  Eigen::MatrixXd out(q.lead_count(), q.member_count());
  for (Index t = 0; t < out.rows(); ++t) {
    for (Index i = 0; i < out.cols(); ++i) {
      out(t, i) = q.values()(t, ranks.ranks(t, i) - 1);
    }
  }
  return ScenarioSet(std::move(out), provenance);
}

namespace {

void check_shapes(const QuantileSet& q, const EnsembleForecast& raw) {
  if (q.lead_count() != raw.lead_count() || q.member_count() != raw.member_count()) {
    std::ostringstream os;
    os << "quantile set is " << q.lead_count() << "x" << q.member_count()
       << " but the raw ensemble is " << raw.lead_count() << "x" << raw.member_count();
    throw std::invalid_argument(os.str());
  }
}

double member_covariance(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  const Index n = a.size();
  if (n < 2) return 0.0;
  const double ma = a.mean();
  const double mb = b.mean();
  return ((a.array() - ma) * (b.array() - mb)).sum() / static_cast<double>(n - 1);
}

}  // namespace

ScenarioSet ecc(const QuantileSet& q, const EnsembleForecast& raw, Rng& rng, TiePolicy ties) {
  check_shapes(q, raw);
  return reorder(q, compute_ranks(raw.members(), ties, rng), Provenance::ecc);
}

ErrorCorrelationMatrix::ErrorCorrelationMatrix(linalg::SymmetricMatrix<double> matrix,
                                               Eigen::MatrixXi pair_counts, bool repaired)
    : matrix_(std::move(matrix)), pair_counts_(std::move(pair_counts)), repaired_(repaired) {
  const Eigen::VectorXd diag = matrix_.matrix().diagonal();
  if ((diag.array() - 1.0).abs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("error correlation matrix must have unit diagonal");
  }
  if (matrix_.matrix().cwiseAbs().maxCoeff() > 1.0 + 1e-12) {
    throw std::invalid_argument("error correlation entries must lie in [-1, 1]");
  }
}

ErrorCorrelationMatrix ErrorCorrelationMatrix::identity(Index lead_count) {
  return ErrorCorrelationMatrix(linalg::SymmetricMatrix<double>::identity(lead_count));
}

Eigen::VectorXd ErrorCorrelationMatrix::lagged_correlation() const {
  const Index n = lead_count();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(std::max<Index>(n - 1, 0));
  for (Index k = 1; k < n; ++k) {
    double sum = 0.0;
    for (Index t = 0; t + k < n; ++t) sum += matrix()(t, t + k);
    out(k - 1) = sum / static_cast<double>(n - k);
  }
  return out;
}

ErrorCorrelationMatrix estimate_error_correlation(const TrainingWindow& window,
                                                  CorrelationOptions options) {
  const Index lead_count = window.lead_count();
  if (lead_count == 0) {
    throw std::invalid_argument("estimate_error_correlation: empty training window");
  }
  const Index days = static_cast<Index>(window.cases.size());
  Eigen::MatrixXd errors(days, lead_count);
  for (Index d = 0; d < days; ++d) {
    const auto& c = window.cases[static_cast<std::size_t>(d)];
    errors.row(d) = (c.observed - c.ensemble_mean).transpose();
  }
  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> present = !errors.array().isNaN();

  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(lead_count, lead_count);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(lead_count, lead_count);
  int undefined = 0;
  int shrunk = 0;
  for (Index t1 = 0; t1 < lead_count; ++t1) {
    counts(t1, t1) = static_cast<int>(present.col(t1).count());
    for (Index t2 = t1 + 1; t2 < lead_count; ++t2) {
      const linalg::Mask both = present.col(t1) && present.col(t2);
      const int n_pairs = static_cast<int>(both.count());
      counts(t1, t2) = counts(t2, t1) = n_pairs;
      const Eigen::VectorXd u = errors.col(t1).array().isNaN().select(0.0, errors.col(t1));
      const Eigen::VectorXd v = errors.col(t2).array().isNaN().select(0.0, errors.col(t2));
      const auto rho = linalg::pearson(u, v, both);
      double value = 0.0;
      if (!rho) {
        ++undefined;
      } else {
        value = *rho;
        if (n_pairs < options.min_pairs) {
          value *= static_cast<double>(n_pairs) / static_cast<double>(options.min_pairs);
          ++shrunk;
        }
      }
      r(t1, t2) = r(t2, t1) = value;
    }
  }
  if (undefined > 0) {
    log::warn("error correlation: " + std::to_string(undefined) +
              " entries undefined (too few pairs or zero variance); set to 0");
  }
  if (shrunk > 0) {
    log::warn("error correlation: " + std::to_string(shrunk) + " entries have fewer than " +
              std::to_string(options.min_pairs) + " pairs; shrunk toward 0");
  }
  auto [repaired, changed] = linalg::repair_correlation(linalg::SymmetricMatrix<double>(r),
                                                        {options.eigenvalue_floor});
  return ErrorCorrelationMatrix(std::move(repaired), std::move(counts), changed);
}

DeccSteps decc_steps(const QuantileSet& q, const EnsembleForecast& raw,
                     const ErrorCorrelationMatrix& re, Rng& rng, TiePolicy ties) {
  check_shapes(q, raw);
  if (re.lead_count() != raw.lead_count()) {
    throw std::invalid_argument("decc: correlation matrix is " + std::to_string(re.lead_count()) +
                                "x" + std::to_string(re.lead_count()) + " but forecast has " +
                                std::to_string(raw.lead_count()) + " lead times");
  }
  ScenarioSet post = ecc(q, raw, rng, ties);
  CorrectionSet corrections{post.values() - raw.members()};

  Eigen::MatrixXd adjusted_corrections;
  Eigen::MatrixXd adjusted;
  if (re.symmetric().is_identity()) {
    // R^{1/2} = I, so x + c is the ECC ensemble itself.
    adjusted_corrections = corrections.values;
    adjusted = post.values();
  } else {
    const auto root = linalg::sqrt_psd(re.symmetric());
    adjusted_corrections = root.matrix() * corrections.values;
    adjusted = raw.members() + adjusted_corrections;
  }
  Template tmpl = make_template(std::move(adjusted), TemplateSource::adjusted_ensemble, ties, rng);
  ScenarioSet scenarios = reorder(q, tmpl.ranks, Provenance::decc);
  return {std::move(post), std::move(corrections), std::move(adjusted_corrections),
          std::move(tmpl), std::move(scenarios)};
}

ScenarioSet decc(const QuantileSet& q, const EnsembleForecast& raw,
                 const ErrorCorrelationMatrix& re, Rng& rng, TiePolicy ties) {
  return std::move(decc_steps(q, raw, re, rng, ties).scenarios);
}

ScenarioSet climatological_template(const QuantileSet& q,
                                    const std::vector<Eigen::VectorXd>& history, Rng& rng,
                                    TiePolicy ties) {
  const Index n = q.member_count();
  std::vector<const Eigen::VectorXd*> complete;
  for (const auto& h : history) {
    if (h.size() == q.lead_count() && h.allFinite()) complete.push_back(&h);
  }
  if (static_cast<Index>(complete.size()) < n) {
    throw std::invalid_argument("climatological template needs " + std::to_string(n) +
                                " complete trajectories, got " +
                                std::to_string(complete.size()));
  }
  std::vector<const Eigen::VectorXd*> chosen;
  chosen.reserve(static_cast<std::size_t>(n));
  std::sample(complete.begin(), complete.end(), std::back_inserter(chosen), n, rng);
  Eigen::MatrixXd z(q.lead_count(), n);
  for (Index i = 0; i < n; ++i) z.col(i) = *chosen[static_cast<std::size_t>(i)];
  return reorder(q, compute_ranks(z, ties, rng), Provenance::climatological_template);
}

ScenarioSet climatological_template(const QuantileSet& q,
                                    const std::vector<ObservationSeries>& history, Rng& rng,
                                    TiePolicy ties) {
  std::vector<Eigen::VectorXd> trajectories;
  for (const auto& series : history) {
    for (const auto& [date, values] : series.days()) {
      if (values.allFinite()) trajectories.push_back(values);
    }
  }
  return climatological_template(q, trajectories, rng, ties);
}

CovarianceTerms covariance_decomposition(const EnsembleForecast& raw, const CorrectionSet& c,
                                         Index t1, Index t2) {
  if (t1 == t2) {
    throw std::invalid_argument("covariance_decomposition: lead times must differ");
  }
  const Eigen::MatrixXd& x = raw.members();
  if (c.values.rows() != x.rows() || c.values.cols() != x.cols()) {
    throw std::invalid_argument("covariance_decomposition: correction shape mismatch");
  }
  if (t1 < 0 || t2 < 0 || t1 >= x.rows() || t2 >= x.rows()) {
    throw std::out_of_range("covariance_decomposition: lead index out of range");
  }
  const Eigen::MatrixXd post = x + c.values;

  CovarianceTerms out;
  out.total = member_covariance(post.row(t1), post.row(t2));
  const auto term = [](const Eigen::MatrixXd& m, Index a, Index b, bool& degenerate) {
    const double va = member_covariance(m.row(a), m.row(a));
    const double vb = member_covariance(m.row(b), m.row(b));
    if (va <= 0.0 || vb <= 0.0) {
      degenerate = true;
      return 0.0;
    }
    // rho * sigma_a * sigma_b collapses to the covariance itself.
    return member_covariance(m.row(a), m.row(b));
  };
  out.raw_term = term(x, t1, t2, out.raw_degenerate);
  out.correction_term = term(c.values, t1, t2, out.correction_degenerate);
  out.epsilon = out.total - out.raw_term - out.correction_term;
  return out;
}

}  // namespace decc
