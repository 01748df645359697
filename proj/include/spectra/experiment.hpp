#pragma once

// Reproducible simulate / predict / compare / densities experiments. The CLI
// in tools/ is a thin argument layer over these functions.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "spectra/channel.hpp"
#include "spectra/free_moments.hpp"
#include "spectra/rng.hpp"
#include "spectra/spectral_stats.hpp"

namespace spectra::runner {

enum class ExitCode : int { Success = 0, ComparisonFailed = 1, ConfigError = 2, ResourceGuard = 3, RuntimeFailure = 4 };

struct DRule {
  enum class Kind { Fixed, EqualToN, SqrtN } kind = Kind::Fixed;
  std::size_t value = 1;  // Fixed only

  std::size_t resolve(Index n) const;
  bool diverges() const { return kind != Kind::Fixed; }
  std::string describe() const;
};

enum class ComputePath { Auto, Dense, MatrixFree };

struct ExperimentConfig {
  EnsembleSpec ensemble;
  Index n = 0;
  DRule d;
  std::size_t trials = 1;
  std::uint64_t seed_root = 0;
  ExpectationModel expectation;
  bool expectation_from_ensemble = false;  // AnalyticTwirl without explicit statistics
  int p_max = 4;
  std::size_t histogram_bins = 50;
  ComputePath path = ComputePath::Auto;
  std::size_t probes = 64;
  std::vector<double> tolerances;  // empty → defaults
  std::optional<double> ks_threshold;
  std::string histogram_file = "histogram.csv";
  std::string report_file = "report.json";

  // Throws ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  // Fully-resolved configuration, defaults included, for provenance.
  nlohmann::json to_json() const;
};

struct RunOptions {
  std::size_t threads = 1;
  std::optional<ComputePath> path_override;
};

struct SimulationResult {
  ExperimentConfig config;
  std::size_t d = 0;
  bool dense = true;
  std::vector<ESD> trial_esds;                    // dense path
  std::vector<std::vector<double>> trial_moments;  // per trial, orders 1..p_max
  std::vector<std::vector<double>> trial_moment_std_errors;  // matrix-free only
  TrialAggregate aggregate;
  std::vector<double> predicted;  // empty when no prediction is available
  std::vector<KSReport> ks;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
};

// Regime implied by the d rule, with laws taken from the ensemble's limit.
free::Regime regime_for(const ExperimentConfig& config, std::size_t d);
MarginalLaw limit_law(const EnsembleSpec& spec, int max_order);
// Expectation model actually used (resolving ensemble-derived twirl inputs).
ExpectationModel resolve_expectation(const ExperimentConfig& config);

// Throws ResourceGuardError if a dense run is forced beyond the cap.
SimulationResult simulate(const ExperimentConfig& config, const RunOptions& options);

struct ComparisonResult {
  SimulationResult simulation;
  MomentReport moments;
  std::vector<double> tolerances;
  std::vector<OrderVerdict> verdicts;
  bool ks_pass = true;
  bool pass() const;
};

ComparisonResult compare(const ExperimentConfig& config, const RunOptions& options);

nlohmann::json report_json(const SimulationResult& result);
nlohmann::json report_json(const ComparisonResult& result);

// Writes histogram CSV (dense runs) and report JSON into `dir`.
void write_outputs(const SimulationResult& result, const nlohmann::json& report,
                   const std::filesystem::path& dir);

// CSV "order,predicted,regime".
std::string moment_table_csv(const free::Regime& regime, int p_max);

// CSV "x,density,cdf" on a uniform grid over the support; also returns the
// edge-substituted trapezoid integral of the density.
struct DensityTable {
  std::string csv;
  double integral = 0.0;
};
DensityTable density_table(const DensitySpec& spec, std::size_t grid_points);

std::string histogram_csv(const std::vector<HistogramBin>& bins);

// Canonical JSON text used for every written file.
std::string dump(const nlohmann::json& j);

}  // namespace spectra::runner
