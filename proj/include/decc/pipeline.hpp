#pragma once

#include "decc/bootstrap.hpp"
#include "decc/calibration.hpp"
#include "decc/copula.hpp"
#include "decc/dataset.hpp"
#include "decc/io.hpp"
#include "decc/spectral.hpp"
#include "decc/verification.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace decc {

/// A failure inside one pipeline stage; what() starts with the stage name.
class PipelineError : public std::runtime_error {
public:
  PipelineError(std::string stage, const std::string& message);
  const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

enum class CouplingMethod { ecc, decc, climatological_template };

std::string_view to_string(CouplingMethod m);
CouplingMethod coupling_method_from_string(std::string_view s);

struct PipelineConfig {
  std::filesystem::path forecasts_path;
  std::filesystem::path observations_path;
  std::filesystem::path output_dir = "decc-out";

  int window_length_days = 45;
  int ensemble_size = 0;  ///< 0: take from the data
  int lead_count = 0;     ///< 0: take from the data
  std::vector<CouplingMethod> methods{CouplingMethod::ecc, CouplingMethod::decc};
  TiePolicy ties = TiePolicy::random;
  int bootstrap_replicates = 500;
  std::uint64_t seed = 1;
  std::optional<Date> verification_start;  ///< default: first date + window length
  std::optional<Date> verification_end;    ///< default: last date

  EmosOptions emos{};
  CorrelationOptions correlation{};
  int decomposition_bins = 10;
  bool write_scenarios = true;

  /// Builds a config from "section.key" pairs (see README for keys).
  static PipelineConfig from_key_values(const std::map<std::string, std::string>& kv);
  void validate() const;
};

/// Environment variable that overrides PipelineConfig::output_dir.
inline constexpr const char* kOutputDirEnv = "DECC_OUTPUT_DIR";

void apply_environment(PipelineConfig& config);

/// Mean daily wind and largest step-to-step increase, per member (column).
struct DerivedProducts {
  Eigen::VectorXd daily_mean;
  Eigen::VectorXd max_upward_ramp;
};

DerivedProducts derive_products(const Eigen::MatrixXd& scenarios);
DerivedProducts derive_products(const ScenarioSet& s);

/// Everything computed for one (date, station) forecast case.
struct CaseProducts {
  Date date;
  std::string station;
  EmosCoefficients coefficients;
  ErrorCorrelationMatrix correlation = ErrorCorrelationMatrix::identity(1);
  QuantileSet quantiles{Eigen::MatrixXd::Zero(1, 1)};
  std::map<std::string, ScenarioSet> scenarios;  ///< keyed by method label, includes "raw"
};

/// Calibrates one case on its rolling window and couples it with every
/// configured method.
CaseProducts process_case(const PipelineConfig& config, const Dataset& data,
                          const std::string& station, Date date);

struct LagSummary {
  Eigen::VectorXd mean;                     ///< per lag 1..T-1
  std::vector<std::array<double, 5>> quantiles;  ///< per lag, at kBootstrapLevels
  long cases = 0;
};

struct ProductDecomposition {
  CrpsDecomposition full;
  BootstrapDistribution reliability;
  BootstrapDistribution resolution;
};

/// Scores, histograms, bootstrap summaries and spectra for a forecast collection.
struct VerificationReport {
  std::vector<std::string> methods;  ///< "raw" first
  Index members = 0;
  Index lead_count = 0;
  long cases = 0;
  long skipped_cases = 0;
  std::vector<Date> days;
  ScoreTable scores;
  BootstrapSummary bootstrap;
  std::map<std::string, RankHistogram> average_rank;
  std::map<std::string, RankHistogram> band_depth;
  std::optional<RankHistogram> calibration;  ///< univariate: obs among calibrated quantiles
  std::map<std::string, std::map<std::string, ProductDecomposition>> products;  ///< method -> product
  std::optional<AmplitudeSpectrum> spectrum;
  std::optional<LagSummary> lagged_correlation;
  std::vector<io::CoefficientRecord> coefficients;
  std::vector<io::ScenarioRecord> scenarios;
};

/// Accumulates verification statistics case by case.
class Verifier {
public:
  Verifier(Index members, Index lead_count, std::uint64_t seed, int bins = 10);

  /// Scores every scenario set in `scenarios` (keyed by method label) against a
  /// complete observed trajectory.
  void add_case(Date date, const std::string& station,
                const std::map<std::string, Eigen::MatrixXd>& scenarios, const Eigen::VectorXd& obs);
  void add_calibration_rank(const Eigen::VectorXd& quantiles, double observed);
  void add_correlation(const ErrorCorrelationMatrix& re);

  /// Bootstraps and assembles the report. Throws PipelineError when no case
  /// was added.
  VerificationReport finish(int replicates) const;

private:
  Index members_;
  Index lead_count_;
  std::uint64_t seed_;
  int bins_;
  Rng rng_;
  std::vector<std::string> methods_;
  std::vector<Date> case_dates_;
  ScoreTable scores_;
  std::map<std::string, RankHistogram> arh_;
  std::map<std::string, RankHistogram> bdrh_;
  RankHistogram calibration_;
  AmplitudeSpectrum spectrum_;
  std::vector<Eigen::VectorXd> lags_;
  /// method -> product -> rows (cases x members) and matching observations
  std::map<std::string, std::map<std::string, std::vector<Eigen::VectorXd>>> product_members_;
  std::map<std::string, std::vector<double>> product_obs_;
};

/// Runs calibration, coupling and verification over the verification period.
VerificationReport run_pipeline(const PipelineConfig& config, const Dataset& data);

/// File-based variant: ingests the configured CSVs, runs, and writes the
/// report into config.output_dir. Outputs are removed again on failure.
VerificationReport run_pipeline(const PipelineConfig& config);

nlohmann::json report_json(const VerificationReport& report, const PipelineConfig& config);

/// Writes report.json, scores.csv, histograms.csv, spectrum.csv,
/// coefficients.csv and (optionally) scenarios.csv. Returns the files written.
std::vector<std::filesystem::path> write_report(const VerificationReport& report,
                                                const PipelineConfig& config,
                                                const std::filesystem::path& dir);

/// Score kind label, e.g. "decc.pvs1".
std::string score_kind(const std::string& method, const std::string& score);

}  // namespace decc
