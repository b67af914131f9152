// decc: synthetic data, calibration, coupling and verification from the shell.

#include "decc/io.hpp"
#include "decc/log.hpp"
#include "decc/pipeline.hpp"
#include "decc/synthetic.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>

namespace {

using decc::PipelineConfig;

struct CommonOptions {
  std::string config_file;
  std::string forecasts;
  std::string observations;
  std::string output;
  std::optional<int> window;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::optional<std::string> start;
  std::optional<std::string> end;
  std::vector<std::string> methods;
  std::optional<std::string> ties;
  std::optional<bool> scenarios;
};

void add_common(CLI::App* app, CommonOptions& o, bool needs_inputs) {
  app->add_option("-c,--config", o.config_file, "key=value config file")->check(CLI::ExistingFile);
  auto* f = app->add_option("-f,--forecasts", o.forecasts, "forecast CSV");
  auto* y = app->add_option("-y,--observations", o.observations, "observation CSV");
  if (needs_inputs) {
    f->check(CLI::ExistingFile);
    y->check(CLI::ExistingFile);
  }
  app->add_option("-o,--output", o.output, "output directory (env " + std::string(decc::kOutputDirEnv) + " wins)");
  app->add_option("--window", o.window, "training window length in days");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--replicates", o.replicates, "bootstrap replicates");
  app->add_option("--start", o.start, "first verification day (YYYY-MM-DD)");
  app->add_option("--end", o.end, "last verification day (YYYY-MM-DD)");
  app->add_option("-m,--method", o.methods, "coupling method: ecc, decc, climatological-template");
  app->add_option("--ties", o.ties, "tie policy: random or first-occurrence");
  app->add_option("--scenarios", o.scenarios, "write scenarios.csv (true/false)");
}

PipelineConfig build_config(const CommonOptions& o) {
  std::map<std::string, std::string> kv;
  if (!o.config_file.empty()) kv = decc::io::read_key_values(std::filesystem::path(o.config_file));
  if (!o.forecasts.empty()) kv["input.forecasts"] = o.forecasts;
  if (!o.observations.empty()) kv["input.observations"] = o.observations;
  if (!o.output.empty()) kv["output.dir"] = o.output;
  if (o.window) kv["calibration.window_length_days"] = std::to_string(*o.window);
  if (o.seed) kv["run.seed"] = std::to_string(*o.seed);
  if (o.replicates) kv["verification.bootstrap_replicates"] = std::to_string(*o.replicates);
  if (o.start) kv["verification.start"] = *o.start;
  if (o.end) kv["verification.end"] = *o.end;
  if (o.ties) kv["coupling.tie_policy"] = *o.ties;
  if (o.scenarios) kv["output.scenarios"] = *o.scenarios ? "true" : "false";
  if (!o.methods.empty()) {
    std::string joined;
    for (const auto& m : o.methods) joined += (joined.empty() ? "" : ",") + m;
    kv["coupling.methods"] = joined;
  }
  PipelineConfig config = PipelineConfig::from_key_values(kv);
  decc::apply_environment(config);
  if (config.forecasts_path.empty() || config.observations_path.empty()) {
    throw std::invalid_argument("forecast and observation CSVs are required (--forecasts, --observations)");
  }
  return config;
}

decc::Dataset load(const PipelineConfig& config) {
  return decc::Dataset(decc::io::read_forecasts(config.forecasts_path),
                       decc::io::read_observations(config.observations_path));
}

/// Verification-period cases in (date, station) order.
template <typename F>
void for_each_case(const PipelineConfig& config, const decc::Dataset& data, F&& f) {
  const auto dates = data.all_dates();
  if (dates.empty()) throw std::runtime_error("no forecasts");
  const decc::Date start = config.verification_start.value_or(dates.front() + config.window_length_days);
  const decc::Date end = config.verification_end.value_or(dates.back());
  for (const auto& date : dates) {
    if (date < start || end < date) continue;
    for (const auto& station : data.stations()) {
      if (data.forecast(station, date) != nullptr) f(station, date);
    }
  }
}

int cmd_synth(const decc::GeneratorConfig& g, const std::string& out_option) {
  g.validate();
  PipelineConfig paths;
  if (!out_option.empty()) paths.output_dir = out_option;
  decc::apply_environment(paths);
  const auto data = decc::generate(g);
  std::ostringstream f;
  std::ostringstream y;
  decc::io::write_forecasts(f, data.forecasts);
  decc::io::write_observations(y, data.observations);
  decc::io::write_text(paths.output_dir / "forecasts.csv", f.str());
  decc::io::write_text(paths.output_dir / "observations.csv", y.str());
  std::cout << "wrote " << data.forecasts.size() << " forecasts to " << paths.output_dir.string() << '\n';
  return 0;
}

int cmd_calibrate(const PipelineConfig& config) {
  const auto data = load(config);
  std::vector<decc::io::CoefficientRecord> records;
  for_each_case(config, data, [&](const std::string& station, decc::Date date) {
    const auto window = decc::make_training_window(data, station, date, config.window_length_days);
    const auto* f = data.forecast(station, date);
    const auto coeffs = decc::fit_emos_all(window, f->lead_count(), config.emos);
    for (std::size_t t = 0; t < coeffs.per_lead.size(); ++t) {
      records.push_back({date, station, f->lead_times()[t], coeffs.per_lead[t]});
    }
  });
  std::ostringstream out;
  decc::io::write_coefficients(out, records);
  decc::io::write_text(config.output_dir / "coefficients.csv", out.str());
  std::cout << "wrote " << records.size() << " coefficient rows\n";
  return 0;
}

int cmd_couple(const PipelineConfig& config) {
  const auto data = load(config);
  std::vector<decc::io::ScenarioRecord> records;
  for_each_case(config, data, [&](const std::string& station, decc::Date date) {
    const auto c = decc::process_case(config, data, station, date);
    for (const auto& [label, s] : c.scenarios) records.push_back({date, station, s});
  });
  std::ostringstream out;
  decc::io::write_scenarios(out, records);
  decc::io::write_text(config.output_dir / "scenarios.csv", out.str());
  std::cout << "wrote " << records.size() << " scenario sets\n";
  return 0;
}

using CaseSets = std::map<std::pair<decc::Date, std::string>, std::map<std::string, Eigen::MatrixXd>>;

CaseSets group_scenarios(const std::filesystem::path& path) {
  CaseSets cases;
  for (const auto& r : decc::io::read_scenarios(path)) {
    cases[{r.date, r.station}][std::string(decc::to_string(r.scenarios.provenance()))] =
        r.scenarios.values();
  }
  if (cases.empty()) throw std::runtime_error("no scenarios in " + path.string());
  return cases;
}

std::map<std::string, decc::ObservationSeries> observations_by_station(const std::filesystem::path& p) {
  std::map<std::string, decc::ObservationSeries> out;
  for (auto& s : decc::io::read_observations(p)) out.emplace(s.station_id(), std::move(s));
  return out;
}

int cmd_verify(const std::string& scenarios_path, const PipelineConfig& config, bool spectrum_only) {
  const auto cases = group_scenarios(scenarios_path);
  const auto obs = observations_by_station(config.observations_path);
  const auto& first = cases.begin()->second.begin()->second;
  decc::Verifier verifier(first.cols(), first.rows(), config.seed, config.decomposition_bins);
  long used = 0;
  for (const auto& [key, sets] : cases) {
    const auto it = obs.find(key.second);
    if (it == obs.end()) continue;
    const Eigen::VectorXd* y = it->second.find(key.first);
    if (y == nullptr || !y->allFinite()) continue;
    verifier.add_case(key.first, key.second, sets, *y);
    ++used;
  }
  const auto report = verifier.finish(config.bootstrap_replicates);
  if (spectrum_only) {
    std::ostringstream out;
    out << "frequency,source,mean_amplitude\n";
    const auto& s = *report.spectrum;
    for (const auto& source : s.sources()) {
      const Eigen::VectorXd m = s.mean(source);
      for (Eigen::Index k = 0; k < m.size(); ++k) {
        out << decc::io::format_number(s.frequencies()(k)) << ',' << source << ','
            << decc::io::format_number(m(k)) << '\n';
      }
    }
    decc::io::write_text(config.output_dir / "spectrum.csv", out.str());
    for (const auto& source : s.sources()) {
      std::printf("%-24s high-frequency amplitude %.4f\n", source.c_str(), s.band_mean(source, 4.0));
    }
    return 0;
  }
  PipelineConfig written = config;
  written.write_scenarios = false;
  decc::write_report(report, written, config.output_dir);
  std::printf("verified %ld cases on %zu days\n", used, report.days.size());
  for (const auto& [kind, dist] : report.bootstrap.kinds) {
    std::printf("%-36s %.6g\n", kind.c_str(), dist.sample_mean);
  }
  return 0;
}

int cmd_run(const PipelineConfig& config) {
  const auto report = decc::run_pipeline(config);
  std::printf("%ld cases (%ld skipped) on %zu days; report in %s\n", report.cases,
              report.skipped_cases, report.days.size(), config.output_dir.string().c_str());
  for (const auto& [kind, dist] : report.bootstrap.kinds) {
    std::printf("%-36s %.6g\n", kind.c_str(), dist.sample_mean);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble copula coupling and dual ECC for wind forecasts"};
  app.require_subcommand(1);

  decc::GeneratorConfig gen;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic forecast/observation pair");
  synth->add_option("-o,--output", synth_out, "output directory");
  synth->add_option("--days", gen.days)->capture_default_str();
  synth->add_option("--stations", gen.stations)->capture_default_str();
  synth->add_option("--leads", gen.lead_count)->capture_default_str();
  synth->add_option("--members", gen.members)->capture_default_str();
  synth->add_option("--spread-factor", gen.spread_factor)->capture_default_str();
  synth->add_option("--bias", gen.bias)->capture_default_str();
  synth->add_option("--phi-err", gen.phi_err)->capture_default_str();
  synth->add_option("--phi-truth", gen.phi_truth)->capture_default_str();
  synth->add_option("--clusters", gen.clusters)->capture_default_str();
  synth->add_option("--diurnal", gen.diurnal_amplitude)->capture_default_str();
  synth->add_option("--seed", gen.seed)->capture_default_str();

  CommonOptions cal_o;
  CommonOptions cpl_o;
  CommonOptions ver_o;
  CommonOptions spe_o;
  CommonOptions run_o;
  std::string ver_scen;
  std::string spe_scen;
  auto* calibrate = app.add_subcommand("calibrate", "fit per-lead EMOS coefficients");
  add_common(calibrate, cal_o, false);
  auto* couple = app.add_subcommand("couple", "calibrate and couple into scenario sets");
  add_common(couple, cpl_o, false);
  auto* verify = app.add_subcommand("verify", "score a scenario CSV against observations");
  add_common(verify, ver_o, false);
  verify->add_option("-s,--scenarios-file", ver_scen, "scenario CSV")->required()->check(CLI::ExistingFile);
  auto* spectrum = app.add_subcommand("spectrum", "mean amplitude spectra of a scenario CSV");
  add_common(spectrum, spe_o, false);
  spectrum->add_option("-s,--scenarios-file", spe_scen, "scenario CSV")->required()->check(CLI::ExistingFile);
  auto* run = app.add_subcommand("run", "full pipeline: calibrate, couple, verify, report");
  add_common(run, run_o, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(gen, synth_out);
    if (*calibrate) return cmd_calibrate(build_config(cal_o));
    if (*couple) return cmd_couple(build_config(cpl_o));
    if (*run) return cmd_run(build_config(run_o));
    // verify/spectrum read scenarios, not forecasts.
    auto scen_config = [](CommonOptions o) {
      if (o.forecasts.empty()) o.forecasts = "-";
      return build_config(o);
    };
    if (*verify) return cmd_verify(ver_scen, scen_config(ver_o), false);
    if (*spectrum) return cmd_verify(spe_scen, scen_config(spe_o), true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
