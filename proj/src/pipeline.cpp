#include "decc/pipeline.hpp"

#include "decc/log.hpp"
#include "decc/ranks.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace decc {

PipelineError::PipelineError(std::string stage, const std::string& message)
    : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}

std::string_view to_string(CouplingMethod m) {
  switch (m) {
    case CouplingMethod::ecc: return "ecc";
    case CouplingMethod::decc: return "decc";
    case CouplingMethod::climatological_template: return "climatological-template";
  }
  return "unknown";
}

CouplingMethod coupling_method_from_string(std::string_view s) {
  if (s == "ecc") return CouplingMethod::ecc;
  if (s == "decc" || s == "d-ecc") return CouplingMethod::decc;
  if (s == "climatological-template" || s == "climatology" || s == "schaake") {
    return CouplingMethod::climatological_template;
  }
  throw std::invalid_argument("unknown coupling method '" + std::string(s) + "'");
}

std::string score_kind(const std::string& method, const std::string& score) {
  return method + "." + score;
}

namespace {

constexpr const char* kRaw = "raw";
constexpr const char* kObs = "obs";
constexpr const char* kDailyMean = "daily_mean";
constexpr const char* kMaxRamp = "max_upward_ramp";
constexpr double kHighFrequencyPeriod = 4.0;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': '" + value + "' is not an integer");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': '" + value + "' is not an integer");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("config key '" + key + "': '" + value + "' is not a boolean");
}

/// FNV-1a, stable across platforms (std::hash is not).
std::uint64_t stable_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Rng case_rng(std::uint64_t seed, Date date, const std::string& station) {
  const std::uint64_t h = stable_hash(station);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(date.serial()), static_cast<std::uint32_t>(h),
                    static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_key_values(const std::map<std::string, std::string>& kv) {
  PipelineConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "input.forecasts") {
      c.forecasts_path = value;
    } else if (key == "input.observations") {
      c.observations_path = value;
    } else if (key == "output.dir") {
      c.output_dir = value;
    } else if (key == "output.scenarios") {
      c.write_scenarios = to_bool(key, value);
    } else if (key == "calibration.window_length_days") {
      c.window_length_days = to_int(key, value);
    } else if (key == "calibration.min_samples") {
      c.emos.min_samples = to_int(key, value);
    } else if (key == "calibration.max_iterations") {
      c.emos.optimizer.max_iterations = to_int(key, value);
    } else if (key == "coupling.methods") {
      c.methods.clear();
      for (const auto& m : split_list(value)) c.methods.push_back(coupling_method_from_string(m));
    } else if (key == "coupling.tie_policy") {
      if (value == "random") {
        c.ties = TiePolicy::random;
      } else if (value == "first-occurrence") {
        c.ties = TiePolicy::first_occurrence;
      } else {
        throw std::invalid_argument("config key '" + key + "': unknown tie policy '" + value + "'");
      }
    } else if (key == "coupling.min_pairs") {
      c.correlation.min_pairs = to_int(key, value);
    } else if (key == "verification.start") {
      c.verification_start = Date::parse(value);
    } else if (key == "verification.end") {
      c.verification_end = Date::parse(value);
    } else if (key == "verification.bootstrap_replicates") {
      c.bootstrap_replicates = to_int(key, value);
    } else if (key == "verification.bins") {
      c.decomposition_bins = to_int(key, value);
    } else if (key == "run.seed") {
      c.seed = to_u64(key, value);
    } else if (key == "run.ensemble_size") {
      c.ensemble_size = to_int(key, value);
    } else if (key == "run.lead_count") {
      c.lead_count = to_int(key, value);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

void PipelineConfig::validate() const {
  if (window_length_days < 1) throw std::invalid_argument("window_length_days must be positive");
  if (methods.empty()) throw std::invalid_argument("at least one coupling method is required");
  if (bootstrap_replicates < 1) throw std::invalid_argument("bootstrap_replicates must be positive");
  if (decomposition_bins < 1) throw std::invalid_argument("decomposition bins must be positive");
  if (ensemble_size < 0 || lead_count < 0) throw std::invalid_argument("sizes must be >= 0");
  if (verification_start && verification_end && *verification_end < *verification_start) {
    throw std::invalid_argument("verification period ends before it starts");
  }
}

void apply_environment(PipelineConfig& config) {
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
    config.output_dir = dir;
  }
}

DerivedProducts derive_products(const Eigen::MatrixXd& scenarios) {
  const Index lead_count = scenarios.rows();
  if (lead_count < 2) throw std::invalid_argument("products need at least two lead times");
  if (!scenarios.allFinite()) throw std::invalid_argument("products need complete scenarios");
  DerivedProducts p;
  p.daily_mean = scenarios.colwise().mean().transpose();
  const Eigen::MatrixXd ramps = scenarios.bottomRows(lead_count - 1) - scenarios.topRows(lead_count - 1);
  p.max_upward_ramp = ramps.colwise().maxCoeff().transpose();
  return p;
}

DerivedProducts derive_products(const ScenarioSet& s) { return derive_products(s.values()); }

CaseProducts process_case(const PipelineConfig& config, const Dataset& data,
                          const std::string& station, Date date) {
  const EnsembleForecast* raw = data.forecast(station, date);
  if (raw == nullptr) {
    throw PipelineError("calibration", "no forecast for " + station + " on " + date.iso());
  }
  const Index lead_count = raw->lead_count();
  Rng rng = case_rng(config.seed, date, station);

  CaseProducts out;
  out.date = date;
  out.station = station;
  const TrainingWindow window =
      make_training_window(data, station, date, config.window_length_days);
  staged("calibration", [&] {
    out.coefficients = fit_emos_all(window, lead_count, config.emos);
    out.quantiles = emit_quantiles(out.coefficients, *raw);
  });
  staged("correlation", [&] {
    if (window.cases.empty()) {
      log::warn("no training data for " + station + " on " + date.iso() +
                "; using identity error correlation");
      out.correlation = ErrorCorrelationMatrix::identity(lead_count);
    } else {
      out.correlation = estimate_error_correlation(window, config.correlation);
    }
  });
  staged("coupling", [&] {
    out.scenarios.emplace(kRaw, ScenarioSet(raw->members(), Provenance::raw));
    for (const auto method : config.methods) {
      const std::string label(to_string(method));
      switch (method) {
        case CouplingMethod::ecc:
          out.scenarios.emplace(label, ecc(out.quantiles, *raw, rng, config.ties));
          break;
        case CouplingMethod::decc:
          out.scenarios.emplace(label, decc(out.quantiles, *raw, out.correlation, rng, config.ties));
          break;
        case CouplingMethod::climatological_template: {
          std::vector<Eigen::VectorXd> history;
          for (const auto& c : window.cases) history.push_back(c.observed);
          out.scenarios.emplace(label,
                                climatological_template(out.quantiles, history, rng, config.ties));
          break;
        }
      }
    }
  });
  return out;
}

Verifier::Verifier(Index members, Index lead_count, std::uint64_t seed, int bins)
    : members_(members),
      lead_count_(lead_count),
      seed_(seed),
      bins_(bins),
      rng_(seed),
      calibration_(HistogramKind::univariate, members),
      spectrum_(lead_count) {}

void Verifier::add_case(Date date, const std::string& station,
                        const std::map<std::string, Eigen::MatrixXd>& scenarios,
                        const Eigen::VectorXd& obs) {
  if (obs.size() != lead_count_ || !obs.allFinite()) {
    throw std::invalid_argument("verification needs a complete observed trajectory");
  }
  const DerivedProducts observed = derive_products(Eigen::MatrixXd(obs));
  for (const auto& [method, values] : scenarios) {
    if (values.rows() != lead_count_ || values.cols() != members_) {
      throw std::invalid_argument("scenario set '" + method + "' has the wrong shape");
    }
    if (std::find(methods_.begin(), methods_.end(), method) == methods_.end()) {
      methods_.insert(method == "raw" ? methods_.begin() : methods_.end(), method);
    }
    const auto push = [&](const std::string& score, double v) {
      scores_.push_back({date, station, score_kind(method, score), v});
    };
    push("es", energy_score(values, obs));
    push("pvs0.5", variogram_score(values, obs, 0.5));
    push("pvs1", variogram_score(values, obs, 1.0));

    auto arh = arh_.try_emplace(method, HistogramKind::average_rank, members_).first;
    arh->second.add(multivariate_rank(values, obs, HistogramKind::average_rank, rng_));
    auto bdrh = bdrh_.try_emplace(method, HistogramKind::band_depth, members_).first;
    bdrh->second.add(multivariate_rank(values, obs, HistogramKind::band_depth, rng_));

    const DerivedProducts products = derive_products(values);
    push("crps_daily_mean", crps_ensemble(products.daily_mean, observed.daily_mean(0)));
    push("crps_max_upward_ramp", crps_ensemble(products.max_upward_ramp, observed.max_upward_ramp(0)));
    product_members_[method][kDailyMean].push_back(products.daily_mean);
    product_members_[method][kMaxRamp].push_back(products.max_upward_ramp);

    for (Index i = 0; i < values.cols(); ++i) spectrum_.add(method, values.col(i));
  }
  product_obs_[kDailyMean].push_back(observed.daily_mean(0));
  product_obs_[kMaxRamp].push_back(observed.max_upward_ramp(0));
  spectrum_.add(kObs, obs);
  case_dates_.push_back(date);
}

void Verifier::add_calibration_rank(const Eigen::VectorXd& quantiles, double observed) {
  if (std::isnan(observed)) return;
  calibration_.add(univariate_rank(quantiles, observed, rng_));
}

void Verifier::add_correlation(const ErrorCorrelationMatrix& re) {
  lags_.push_back(re.lagged_correlation());
}

VerificationReport Verifier::finish(int replicates) const {
  if (case_dates_.empty()) {
    throw PipelineError("verification", "empty verification set: no case with complete observations");
  }
  VerificationReport report;
  report.methods = methods_;
  if (const auto it = std::find(report.methods.begin(), report.methods.end(), kRaw);
      it != report.methods.end()) {
    std::rotate(report.methods.begin(), it, it + 1);
  }
  report.members = members_;
  report.lead_count = lead_count_;
  report.cases = static_cast<long>(case_dates_.size());
  const std::set<Date> unique_days(case_dates_.begin(), case_dates_.end());
  report.days.assign(unique_days.begin(), unique_days.end());
  report.scores = scores_;
  report.average_rank = arh_;
  report.band_depth = bdrh_;
  if (calibration_.total() > 0) report.calibration = calibration_;
  report.spectrum = spectrum_;

  const BootstrapPlan plan = staged("bootstrap", [&] {
    return BootstrapPlan::make(report.days, replicates, seed_);
  });
  report.bootstrap = block_bootstrap(scores_, plan);

  // Rows of each day, to rebuild resampled case sets.
  std::map<Date, std::vector<std::size_t>> rows_of_day;
  for (std::size_t k = 0; k < case_dates_.size(); ++k) rows_of_day[case_dates_[k]].push_back(k);
  std::vector<const std::vector<std::size_t>*> day_rows;
  for (const Date& d : plan.days) day_rows.push_back(&rows_of_day.at(d));

  const auto to_matrix = [&](const std::vector<Eigen::VectorXd>& rows,
                             const std::vector<std::size_t>& pick) {
    Eigen::MatrixXd m(static_cast<Index>(pick.size()), members_);
    for (std::size_t k = 0; k < pick.size(); ++k) m.row(static_cast<Index>(k)) = rows[pick[k]].transpose();
    return m;
  };
  std::vector<std::size_t> all(case_dates_.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  for (const auto& [method, per_product] : product_members_) {
    for (const auto& [product, rows] : per_product) {
      const auto& obs_all = product_obs_.at(product);
      const Eigen::VectorXd obs_vec = Eigen::Map<const Eigen::VectorXd>(obs_all.data(),
                                                                       static_cast<Index>(obs_all.size()));
      ProductDecomposition pd;
      pd.full = crps_decomposition(to_matrix(rows, all), obs_vec, bins_);
      std::vector<double> rel;
      std::vector<double> res;
      // The full-sample call has already warned about a small sample.
      const log::ScopedSink quiet([](std::string_view) {});
      for (const auto& draw : plan.draws) {
        std::vector<std::size_t> pick;
        for (std::size_t d : draw) {
          const auto& r = *day_rows[d];
          pick.insert(pick.end(), r.begin(), r.end());
        }
        Eigen::VectorXd obs_pick(static_cast<Index>(pick.size()));
        for (std::size_t k = 0; k < pick.size(); ++k) obs_pick(static_cast<Index>(k)) = obs_all[pick[k]];
        const auto d = crps_decomposition(to_matrix(rows, pick), obs_pick, bins_);
        rel.push_back(d.reliability);
        res.push_back(d.resolution);
      }
      const auto summarize = [](std::vector<double> values, double full) {
        BootstrapDistribution dist;
        dist.sample_mean = full;
        for (std::size_t k = 0; k < kBootstrapLevels.size(); ++k) {
          dist.quantiles[k] = sample_quantile(values, kBootstrapLevels[k]);
        }
        dist.replicate_means = std::move(values);
        return dist;
      };
      pd.reliability = summarize(std::move(rel), pd.full.reliability);
      pd.resolution = summarize(std::move(res), pd.full.resolution);
      report.products[method][product] = std::move(pd);
    }
  }

  if (!lags_.empty()) {
    LagSummary lag;
    const Index n_lags = lags_.front().size();
    lag.cases = static_cast<long>(lags_.size());
    lag.mean = Eigen::VectorXd::Zero(n_lags);
    for (const auto& l : lags_) lag.mean += l;
    lag.mean /= static_cast<double>(lags_.size());
    for (Index k = 0; k < n_lags; ++k) {
      std::vector<double> values;
      for (const auto& l : lags_) values.push_back(l(k));
      std::array<double, 5> q{};
      for (std::size_t j = 0; j < q.size(); ++j) q[j] = sample_quantile(values, kBootstrapLevels[j]);
      lag.quantiles.push_back(q);
    }
    report.lagged_correlation = std::move(lag);
  }
  return report;
}

VerificationReport run_pipeline(const PipelineConfig& config, const Dataset& data) {
  config.validate();
  const auto dates = data.all_dates();
  if (dates.empty()) throw PipelineError("ingest", "no forecasts");
  const EnsembleForecast& first = data.forecasts().begin()->second;
  const Index members = first.member_count();
  const Index lead_count = first.lead_count();
  if (config.ensemble_size != 0 && config.ensemble_size != members) {
    throw PipelineError("ingest", "data has " + std::to_string(members) +
                                      " members, config expects " +
                                      std::to_string(config.ensemble_size));
  }
  if (config.lead_count != 0 && config.lead_count != lead_count) {
    throw PipelineError("ingest", "data has " + std::to_string(lead_count) +
                                      " lead times, config expects " +
                                      std::to_string(config.lead_count));
  }
  for (const auto& [key, f] : data.forecasts()) {
    if (f.member_count() != members || f.lead_count() != lead_count) {
      throw PipelineError("ingest", "forecast " + key.first + " " + key.second.iso() +
                                        " has a different shape from the rest");
    }
  }

  const Date start = config.verification_start.value_or(dates.front() + config.window_length_days);
  const Date end = config.verification_end.value_or(dates.back());

  Verifier verifier(members, lead_count, config.seed, config.decomposition_bins);
  std::vector<io::CoefficientRecord> coefficients;
  std::vector<io::ScenarioRecord> scenario_records;
  long skipped = 0;
  const auto stations = data.stations();
  for (const Date& date : dates) {
    if (date < start || end < date) continue;
    for (const auto& station : stations) {
      const EnsembleForecast* raw = data.forecast(station, date);
      if (raw == nullptr) continue;
      const CaseProducts c = process_case(config, data, station, date);
      for (Index t = 0; t < lead_count; ++t) {
        coefficients.push_back({date, station, raw->lead_times()[static_cast<std::size_t>(t)],
                                c.coefficients.per_lead[static_cast<std::size_t>(t)]});
      }
      if (config.write_scenarios) {
        for (const auto& [label, s] : c.scenarios) scenario_records.push_back({date, station, s});
      }
      verifier.add_correlation(c.correlation);

      const ObservationSeries* obs = data.observations(station);
      const Eigen::VectorXd* y = obs == nullptr ? nullptr : obs->find(date);
      if (y != nullptr) {
        for (Index t = 0; t < lead_count; ++t) {
          verifier.add_calibration_rank(c.quantiles.values().row(t).transpose(), (*y)(t));
        }
      }
      if (y == nullptr || !y->allFinite()) {
        ++skipped;
        continue;
      }
      std::map<std::string, Eigen::MatrixXd> sets;
      for (const auto& [label, s] : c.scenarios) sets.emplace(label, s.values());
      staged("verification", [&] { verifier.add_case(date, station, sets, *y); });
    }
  }
  VerificationReport report = verifier.finish(config.bootstrap_replicates);
  report.skipped_cases = skipped;
  report.coefficients = std::move(coefficients);
  report.scenarios = std::move(scenario_records);
  return report;
}

namespace {

nlohmann::json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return std::stod(buf);
}

nlohmann::json num_array(const Eigen::VectorXd& v) {
  auto out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
  return out;
}

nlohmann::json quantile_object(const std::array<double, 5>& q) {
  return {{"q05", num(q[0])}, {"q25", num(q[1])}, {"q50", num(q[2])}, {"q75", num(q[3])},
          {"q95", num(q[4])}};
}

nlohmann::json histogram_json(const RankHistogram& h) {
  return {{"kind", std::string(to_string(h.kind()))},
          {"counts", h.counts()},
          {"total", h.total()},
          {"flatness", num(h.flatness())},
          {"chi_square", num(h.chi_square())},
          {"chi_square_p", num(h.chi_square_p_value())}};
}

}  // namespace

nlohmann::json report_json(const VerificationReport& report, const PipelineConfig& config) {
  nlohmann::json j;
  j["format"] = "decc-report/1";
  auto methods = nlohmann::json::array();
  for (const auto m : config.methods) methods.push_back(std::string(to_string(m)));
  j["config"] = {
      {"window_length_days", config.window_length_days},
      {"methods", methods},
      {"tie_policy", config.ties == TiePolicy::random ? "random" : "first-occurrence"},
      {"bootstrap_replicates", config.bootstrap_replicates},
      {"seed", config.seed},
      {"min_samples", config.emos.min_samples},
      {"min_pairs", config.correlation.min_pairs},
      {"decomposition_bins", config.decomposition_bins},
  };
  j["ensemble_size"] = report.members;
  j["lead_count"] = report.lead_count;
  j["cases"] = report.cases;
  j["skipped_cases"] = report.skipped_cases;
  j["days"] = report.days.size();
  if (!report.days.empty()) {
    j["first_day"] = report.days.front().iso();
    j["last_day"] = report.days.back().iso();
  }
  j["methods"] = report.methods;

  auto scores = nlohmann::json::object();
  for (const auto& [kind, dist] : report.bootstrap.kinds) {
    scores[kind] = {{"mean", num(dist.sample_mean)}, {"bootstrap", quantile_object(dist.quantiles)}};
  }
  j["scores"] = scores;
  j["bootstrap_replicates"] = report.bootstrap.replicates;

  auto hist = nlohmann::json::object();
  for (const auto& [method, h] : report.average_rank) hist[method]["average-rank"] = histogram_json(h);
  for (const auto& [method, h] : report.band_depth) hist[method]["band-depth"] = histogram_json(h);
  j["rank_histograms"] = hist;
  if (report.calibration) j["calibration_histogram"] = histogram_json(*report.calibration);

  auto products = nlohmann::json::object();
  for (const auto& [method, per_product] : report.products) {
    for (const auto& [product, pd] : per_product) {
      products[method][product] = {
          {"crps", num(pd.full.crps)},
          {"reliability", num(pd.full.reliability)},
          {"resolution", num(pd.full.resolution)},
          {"uncertainty", num(pd.full.uncertainty)},
          {"bins", pd.full.bins},
          {"reliability_bootstrap", quantile_object(pd.reliability.quantiles)},
          {"resolution_bootstrap", quantile_object(pd.resolution.quantiles)},
      };
    }
  }
  j["products"] = products;

  if (report.spectrum) {
    const auto& s = *report.spectrum;
    nlohmann::json spec{{"frequencies", num_array(s.frequencies())}};
    for (const auto& source : s.sources()) {
      spec["mean_amplitude"][source] = num_array(s.mean(source));
      spec["high_frequency_mean"][source] = num(s.band_mean(source, kHighFrequencyPeriod));
    }
    spec["high_frequency_max_period_hours"] = kHighFrequencyPeriod;
    j["spectrum"] = spec;
  }
  if (report.lagged_correlation) {
    const auto& lag = *report.lagged_correlation;
    nlohmann::json l{{"cases", lag.cases}, {"mean", num_array(lag.mean)}};
    auto qs = nlohmann::json::array();
    for (const auto& q : lag.quantiles) qs.push_back(quantile_object(q));
    l["quantiles"] = qs;
    j["lagged_correlation"] = l;
  }
  return j;
}

std::vector<std::filesystem::path> write_report(const VerificationReport& report,
                                                const PipelineConfig& config,
                                                const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& name, const std::string& content) {
    const auto path = dir / name;
    written.push_back(path);
    io::write_text(path, content);
  };
  try {
    emit("report.json", report_json(report, config).dump(2) + "\n");

    std::ostringstream scores;
    scores << "date,station,score_kind,value\n";
    for (const auto& s : report.scores) {
      scores << s.date.iso() << ',' << s.station << ',' << s.kind << ','
             << io::format_number(s.value) << '\n';
    }
    emit("scores.csv", scores.str());

    std::ostringstream hist;
    hist << "method,kind,rank,count\n";
    const auto dump = [&](const std::string& method, const RankHistogram& h) {
      for (std::size_t k = 0; k < h.counts().size(); ++k) {
        hist << method << ',' << to_string(h.kind()) << ',' << k + 1 << ',' << h.counts()[k] << '\n';
      }
    };
    for (const auto& [m, h] : report.average_rank) dump(m, h);
    for (const auto& [m, h] : report.band_depth) dump(m, h);
    if (report.calibration) dump("calibrated", *report.calibration);
    emit("histograms.csv", hist.str());

    if (report.spectrum) {
      std::ostringstream spec;
      spec << "frequency,source,mean_amplitude\n";
      const auto& s = *report.spectrum;
      for (const auto& source : s.sources()) {
        const Eigen::VectorXd m = s.mean(source);
        for (Index k = 0; k < m.size(); ++k) {
          spec << io::format_number(s.frequencies()(k)) << ',' << source << ','
               << io::format_number(m(k)) << '\n';
        }
      }
      emit("spectrum.csv", spec.str());
    }

    std::ostringstream coeffs;
    io::write_coefficients(coeffs, report.coefficients);
    emit("coefficients.csv", coeffs.str());

    if (config.write_scenarios && !report.scenarios.empty()) {
      std::ostringstream sc;
      io::write_scenarios(sc, report.scenarios);
      emit("scenarios.csv", sc.str());
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
  return written;
}

VerificationReport run_pipeline(const PipelineConfig& config) {
  const Dataset data = staged("ingest", [&] {
    return Dataset(io::read_forecasts(config.forecasts_path),
                   io::read_observations(config.observations_path));
  });
  VerificationReport report = run_pipeline(config, data);
  staged("write", [&] { write_report(report, config, config.output_dir); });
  return report;
}

}  // namespace decc
