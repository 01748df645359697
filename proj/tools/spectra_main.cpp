// spectra: simulate, predict and compare spectra of random Hermitian-Kraus channels.

#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "spectra/errors.hpp"
#include "spectra/experiment.hpp"

namespace {

using spectra::runner::ExitCode;

int code(ExitCode c) { return static_cast<int>(c); }

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  spectra::linalg::set_blas_threads(1);

  CLI::App app{"Spectra of random quantum channels with Hermitian Kraus operators"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::size_t threads = std::max(1U, std::thread::hardware_concurrency());
  bool force_dense = false;
  bool force_matfree = false;
  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    cmd->add_option("--output", output_dir, "output directory")->required();
    cmd->add_option("--threads", threads, "worker threads (default: hardware count)")->check(CLI::PositiveNumber);
    auto* dense = cmd->add_flag("--dense", force_dense, "force the dense eigenvalue path");
    auto* matfree = cmd->add_flag("--matfree", force_matfree, "force the matrix-free moment path");
    dense->excludes(matfree);
  };
  auto* simulate = app.add_subcommand("simulate", "sample channels and write histogram CSV + report JSON");
  add_run_options(simulate);
  auto* compare = app.add_subcommand("compare", "simulate and compare with the predicted limit");
  add_run_options(compare);

  std::string regime_name;
  std::vector<std::string> law_names;
  int d = 0;
  int p_max = 4;
  std::string predict_output;
  auto* predict = app.add_subcommand("predict", "write the predicted limit moments as CSV");
  predict->add_option("--regime", regime_name, "fixed or growing")->required()->check(CLI::IsMember({"fixed", "growing"}));
  predict->add_option("--law", law_names, "marginal law(s): Rademacher, Semicircle, CenteredMP (one, or one per Kraus operator)");
  predict->add_option("--d", d, "Kraus count (fixed regime)");
  predict->add_option("--pmax", p_max, "highest moment order");
  predict->add_option("--output", predict_output, "CSV file")->required();

  std::string density_kind;
  double density_d = 0.0;
  std::size_t grid = 201;
  std::string density_output;
  auto* densities = app.add_subcommand("densities", "write a density/CDF table as CSV");
  densities->add_option("--kind", density_kind, "semicircle, km or dilated-km")
      ->required()
      ->check(CLI::IsMember({"semicircle", "km", "dilated-km"}));
  densities->add_option("--d", density_d, "Kesten-McKay parameter");
  densities->add_option("--grid", grid, "grid points");
  densities->add_option("--output", density_output, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitCode::ConfigError);
  }

  try {
    if (*simulate || *compare) {
      const auto config = spectra::runner::ExperimentConfig::load(config_path);
      spectra::runner::RunOptions options;
      options.threads = threads;
      if (force_dense) options.path_override = spectra::runner::ComputePath::Dense;
      if (force_matfree) options.path_override = spectra::runner::ComputePath::MatrixFree;
      if (*simulate) {
        const auto result = spectra::runner::simulate(config, options);
        spectra::runner::write_outputs(result, spectra::runner::report_json(result), output_dir);
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        return code(ExitCode::Success);
      }
      const auto result = spectra::runner::compare(config, options);
      spectra::runner::write_outputs(result.simulation, spectra::runner::report_json(result), output_dir);
      for (const auto& w : result.simulation.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& v : result.verdicts) {
        std::cout << "order " << v.order << ": " << (v.pass ? "pass" : "FAIL") << " (|dev| " << v.deviation
                  << ", allowance " << v.allowance << ")\n";
      }
      for (const auto& ks : result.simulation.ks) {
        std::cout << "KS vs " << ks.target.describe() << ": " << ks.statistic << "\n";
      }
      return code(result.pass() ? ExitCode::Success : ExitCode::ComparisonFailed);
    }
    if (*predict) {
      if (p_max < 1 || p_max > spectra::free::kMaxMomentOrder) throw spectra::ConfigError("--pmax must lie in [1, 10]");
      const int order = std::max(2, p_max);
      std::vector<spectra::MarginalLaw> laws;
      for (const auto& name : law_names) laws.push_back(spectra::MarginalLaw::stock(spectra::law_name_from_string(name), order));
      spectra::free::Regime regime;
      if (regime_name == "fixed") {
        if (d < 1) throw spectra::ConfigError("--d >= 1 is required for the fixed regime");
        if (laws.empty()) laws.push_back(spectra::MarginalLaw::rademacher(order));
        regime = spectra::free::Regime::fixed(d, laws);
      } else {
        regime = spectra::free::Regime::growing(laws);
      }
      write_file(predict_output, spectra::runner::moment_table_csv(regime, p_max));
      return code(ExitCode::Success);
    }
    if (*densities) {
      spectra::DensitySpec spec = spectra::DensitySpec::semicircle();
      if (density_kind == "km") spec = spectra::DensitySpec::kesten_mckay(density_d);
      if (density_kind == "dilated-km") spec = spectra::DensitySpec::dilated_kesten_mckay(density_d);
      const auto table = spectra::runner::density_table(spec, grid);
      write_file(density_output, table.csv);
      std::cout << "integral " << table.integral << "\n";
      return code(ExitCode::Success);
    }
  } catch (const spectra::ResourceGuardError& e) {
    std::cerr << "resource guard: " << e.what() << "\n";
    return code(ExitCode::ResourceGuard);
  } catch (const spectra::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return code(ExitCode::ConfigError);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return code(ExitCode::ConfigError);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code(ExitCode::RuntimeFailure);
  }
  return code(ExitCode::Success);
}
