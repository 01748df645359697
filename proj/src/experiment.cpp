#include "spectra/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "spectra/errors.hpp"

namespace spectra::runner {

using nlohmann::json;

namespace {

constexpr std::uint64_t kEmpiricalSalt = 0xE3F1A5C7D2B4960FULL;
constexpr std::uint64_t kProbeSalt = 0x7C15B3A9E2D04F61ULL;
constexpr std::size_t kDefaultEmpiricalTrials = 200;

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_string(ComputePath p) {
  switch (p) {
    case ComputePath::Auto: return "auto";
    case ComputePath::Dense: return "dense";
    case ComputePath::MatrixFree: return "matfree";
  }
  return "auto";
}

ComputePath path_from_string(const std::string& s) {
  if (s == "auto") return ComputePath::Auto;
  if (s == "dense") return ComputePath::Dense;
  if (s == "matfree") return ComputePath::MatrixFree;
  throw ConfigError("path must be auto, dense or matfree (got '" + s + "')");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

std::size_t positive_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ConfigError(std::string(key) + " must be a positive integer");
  }
  return v.get<std::size_t>();
}

DRule drule_from_json(const json& j) {
  DRule rule;
  auto named = [&](const std::string& s) {
    if (s == "n") {
      rule.kind = DRule::Kind::EqualToN;
    } else if (s == "sqrt-n") {
      rule.kind = DRule::Kind::SqrtN;
    } else if (s != "fixed") {
      throw ConfigError("d rule must be fixed, n or sqrt-n (got '" + s + "')");
    }
  };
  if (j.is_number_integer()) {
    if (j.get<long long>() < 1) throw ConfigError("d must be >= 1");
    rule.value = j.get<std::size_t>();
  } else if (j.is_string()) {
    named(j.get<std::string>());
    if (rule.kind == DRule::Kind::Fixed) throw ConfigError("d rule 'fixed' needs a value");
  } else if (j.is_object()) {
    check_keys(j, {"rule", "value"}, "d");
    named(j.at("rule").get<std::string>());
    if (rule.kind == DRule::Kind::Fixed) {
      if (!j.contains("value") || !j.at("value").is_number_integer() || j.at("value").get<long long>() < 1) {
        throw ConfigError("fixed d rule needs an integer value >= 1");
      }
      rule.value = j.at("value").get<std::size_t>();
    }
  } else {
    throw ConfigError("d must be an integer, \"n\", \"sqrt-n\" or {rule, value}");
  }
  return rule;
}

json drule_to_json(const DRule& rule) {
  switch (rule.kind) {
    case DRule::Kind::Fixed: return {{"rule", "fixed"}, {"value", rule.value}};
    case DRule::Kind::EqualToN: return {{"rule", "n"}};
    case DRule::Kind::SqrtN: return {{"rule", "sqrt-n"}};
  }
  return nullptr;
}

json expectation_to_json(const ExpectationModel& m, bool from_ensemble) {
  json j{{"mode", spectra::to_string(m.mode)}};
  switch (m.mode) {
    case ExpectationMode::AnalyticGUE: j["field"] = spectra::to_string(m.field); break;
    case ExpectationMode::AnalyticTwirl:
      if (from_ensemble) {
        j["fromEnsemble"] = true;
      } else {
        j["meanTraceSquared"] = m.mean_trace_squared;
        j["meanTraceOfSquare"] = m.mean_trace_of_square;
      }
      break;
    case ExpectationMode::Empirical: j["trials"] = m.trials; break;
    case ExpectationMode::Zero: break;
  }
  return j;
}

void validate(const ExperimentConfig& c) {
  if (c.n < 1) throw ConfigError("n must be >= 1");
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.p_max < 1 || c.p_max > free::kMaxMomentOrder) {
    throw ConfigError("pMax must lie in [1, " + std::to_string(free::kMaxMomentOrder) + "]");
  }
  if (c.histogram_bins < 1) throw ConfigError("histogramBins must be >= 1");
  if (c.probes < 1) throw ConfigError("probes must be >= 1");
  if (!c.tolerances.empty() && c.tolerances.size() != static_cast<std::size_t>(c.p_max)) {
    throw ConfigError("tolerances must list one value per order 1..pMax");
  }
  for (double t : c.tolerances) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("tolerances must be finite and >= 0");
  }
  if (c.ensemble.kind == EnsembleKind::Ginibre) {
    throw ConfigError("Ginibre matrices are not Hermitian and cannot serve as Hermitian Kraus operators");
  }
  EnsembleSpec spec = c.ensemble;
  spec.n = c.n;
  spec.validate();
  if (c.d.kind == DRule::Kind::Fixed && c.d.value < 1) throw ConfigError("d must be >= 1");
}

ExpectationModel default_expectation(const EnsembleSpec& spec, bool& from_ensemble) {
  from_ensemble = false;
  switch (spec.kind) {
    case EnsembleKind::GUE: return ExpectationModel::analytic_gue(spec.field);
    case EnsembleKind::RotatedRademacher:
    case EnsembleKind::RotatedDeterministic: {
      from_ensemble = true;
      ExpectationModel m;
      m.mode = ExpectationMode::AnalyticTwirl;
      return m;
    }
    case EnsembleKind::WishartCentered: {
      ExpectationModel m;
      m.mode = ExpectationMode::Empirical;
      m.trials = kDefaultEmpiricalTrials;
      return m;
    }
    case EnsembleKind::Ginibre: break;
  }
  return ExpectationModel::zero();
}

EnsembleSpec sized(const ExperimentConfig& c) {
  EnsembleSpec spec = c.ensemble;
  spec.n = c.n;
  return spec;
}

bool use_dense(const ExperimentConfig& config, const RunOptions& options) {
  const ComputePath path = options.path_override.value_or(config.path);
  const auto big = static_cast<std::size_t>(config.n * config.n);
  const bool fits = big <= linalg::max_dense_dim();
  if (path == ComputePath::Dense && !fits) {
    throw ResourceGuardError("dense path needs n^2 = " + std::to_string(big) + " but the dense cap is " +
                             std::to_string(linalg::max_dense_dim()) +
                             "; rerun with --matfree (or path \"matfree\") or raise SPECTRA_MAX_DENSE_DIM");
  }
  if (path == ComputePath::Auto) return fits;
  return path == ComputePath::Dense;
}

struct TrialOutput {
  ESD esd;
  std::vector<double> moments;
  std::vector<double> std_errors;
  std::vector<std::string> warnings;
};

// Runs f(t) for t < count on up to `threads` workers; results land at index t.
// The exception of the lowest failing trial is rethrown.
template <class F>
std::vector<TrialOutput> run_trials(std::size_t count, std::size_t threads, F f) {
  std::vector<TrialOutput> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < count; t = next++) {
      try {
        out[t] = f(t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

json moments_json(const SimulationResult& r) {
  json rows = json::array();
  for (int p = 1; p <= r.config.p_max; ++p) {
    const auto k = static_cast<std::size_t>(p - 1);
    json row{{"order", p},
             {"empirical", r.aggregate.mean_moments[k]},
             {"stdErr", r.aggregate.moment_std_error[k]},
             {"acrossTrialVariance", r.aggregate.moment_variance[k]}};
    row["predicted"] = r.predicted.empty() ? json(nullptr) : json(r.predicted[k]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::size_t DRule::resolve(Index n) const {
  if (n < 1) throw ConfigError("cannot resolve d for n < 1");
  switch (kind) {
    case Kind::Fixed:
      if (value < 1) throw ConfigError("d must be >= 1");
      return value;
    case Kind::EqualToN: return static_cast<std::size_t>(n);
    case Kind::SqrtN: {
      auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
      while (k * k < static_cast<std::size_t>(n)) ++k;
      while (k > 1 && (k - 1) * (k - 1) >= static_cast<std::size_t>(n)) --k;
      return k;
    }
  }
  return value;
}

std::string DRule::describe() const {
  switch (kind) {
    case Kind::Fixed: return "fixed(" + std::to_string(value) + ")";
    case Kind::EqualToN: return "n";
    case Kind::SqrtN: return "sqrt-n";
  }
  return "unknown";
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  try {
    check_keys(j, {"ensemble", "n", "d", "trials", "seedRoot", "expectationModel", "pMax", "histogramBins", "path",
                   "probes", "tolerances", "ksThreshold", "outputs"},
               "config");
    ExperimentConfig c;
    if (!j.contains("ensemble")) throw ConfigError("config needs an ensemble section");
    const json& e = j.at("ensemble");
    check_keys(e, {"kind", "field", "spectrum"}, "ensemble");
    c.ensemble.kind = ensemble_kind_from_string(e.at("kind").get<std::string>());
    if (e.contains("field")) c.ensemble.field = wigner_field_from_string(e.at("field").get<std::string>());
    if (e.contains("spectrum")) c.ensemble.spectrum = e.at("spectrum").get<std::vector<double>>();

    if (!j.contains("n") || !j.at("n").is_number_integer() || j.at("n").get<long long>() < 1) {
      throw ConfigError("n must be a positive integer");
    }
    c.n = j.at("n").get<Index>();
    if (!j.contains("d")) throw ConfigError("config needs d");
    c.d = drule_from_json(j.at("d"));
    c.trials = positive_count(j, "trials", 1);
    if (j.contains("seedRoot")) {
      const json& s = j.at("seedRoot");
      if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<long long>() < 0)) throw ConfigError("seedRoot must be a non-negative integer");
      c.seed_root = j.at("seedRoot").get<std::uint64_t>();
    }
    if (j.contains("pMax")) {
      if (!j.at("pMax").is_number_integer()) throw ConfigError("pMax must be an integer");
      c.p_max = j.at("pMax").get<int>();
    }
    c.histogram_bins = positive_count(j, "histogramBins", c.histogram_bins);
    c.probes = positive_count(j, "probes", c.probes);
    if (j.contains("path")) c.path = path_from_string(j.at("path").get<std::string>());
    if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<std::vector<double>>();
    if (j.contains("ksThreshold") && !j.at("ksThreshold").is_null()) c.ks_threshold = j.at("ksThreshold").get<double>();
    if (j.contains("outputs")) {
      const json& o = j.at("outputs");
      check_keys(o, {"histogram", "report"}, "outputs");
      c.histogram_file = get_or<std::string>(o, "histogram", c.histogram_file);
      c.report_file = get_or<std::string>(o, "report", c.report_file);
    }

    if (j.contains("expectationModel")) {
      const json& m = j.at("expectationModel");
      check_keys(m, {"mode", "field", "meanTraceSquared", "meanTraceOfSquare", "fromEnsemble", "trials"},
                 "expectationModel");
      const ExpectationMode mode = expectation_mode_from_string(m.at("mode").get<std::string>());
      switch (mode) {
        case ExpectationMode::AnalyticGUE:
          c.expectation = ExpectationModel::analytic_gue(
              m.contains("field") ? wigner_field_from_string(m.at("field").get<std::string>()) : c.ensemble.field);
          break;
        case ExpectationMode::AnalyticTwirl:
          if (m.contains("meanTraceSquared") != m.contains("meanTraceOfSquare")) {
            throw ConfigError("AnalyticTwirl needs both meanTraceSquared and meanTraceOfSquare, or neither");
          }
          if (m.contains("meanTraceSquared")) {
            c.expectation = ExpectationModel::analytic_twirl(m.at("meanTraceSquared").get<double>(),
                                                             m.at("meanTraceOfSquare").get<double>());
          } else {
            c.expectation.mode = ExpectationMode::AnalyticTwirl;
            c.expectation_from_ensemble = true;
          }
          break;
        case ExpectationMode::Empirical:
          c.expectation.mode = ExpectationMode::Empirical;
          c.expectation.trials = positive_count(m, "trials", kDefaultEmpiricalTrials);
          break;
        case ExpectationMode::Zero: c.expectation = ExpectationModel::zero(); break;
      }
    } else {
      EnsembleSpec spec = c.ensemble;
      spec.n = c.n;
      c.expectation = default_expectation(spec, c.expectation_from_ensemble);
    }
    validate(c);
    return c;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed config: ") + ex.what());
  }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + ex.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json e{{"kind", spectra::to_string(ensemble.kind)}};
  if (ensemble.kind == EnsembleKind::GUE) e["field"] = spectra::to_string(ensemble.field);
  if (ensemble.kind == EnsembleKind::RotatedDeterministic) e["spectrum"] = ensemble.spectrum;
  json j{{"ensemble", e},
         {"n", n},
         {"d", drule_to_json(d)},
         {"trials", trials},
         {"seedRoot", seed_root},
         {"expectationModel", expectation_to_json(expectation, expectation_from_ensemble)},
         {"pMax", p_max},
         {"histogramBins", histogram_bins},
         {"path", to_string(path)},
         {"probes", probes},
         {"tolerances", tolerances},
         {"ksThreshold", ks_threshold ? json(*ks_threshold) : json(nullptr)},
         {"outputs", {{"histogram", histogram_file}, {"report", report_file}}}};
  return j;
}

MarginalLaw limit_law(const EnsembleSpec& spec, int max_order) {
  const int order = std::max(2, max_order);
  switch (spec.kind) {
    case EnsembleKind::RotatedRademacher: return MarginalLaw::rademacher(order);
    case EnsembleKind::GUE: return MarginalLaw::semicircle(order);
    case EnsembleKind::WishartCentered: return MarginalLaw::centered_mp(order);
    case EnsembleKind::RotatedDeterministic: {
      if (spec.spectrum.empty()) throw ConfigError("RotatedDeterministic needs a spectrum");
      std::vector<double> m(static_cast<std::size_t>(order), 0.0);
      for (double s : spec.spectrum) {
        double power = 1.0;
        for (auto& v : m) {
          power *= s;
          v += power;
        }
      }
      for (auto& v : m) v /= static_cast<double>(spec.spectrum.size());
      return MarginalLaw::from_moments(std::move(m));
    }
    case EnsembleKind::Ginibre: break;
  }
  throw ConfigError("no limit law for ensemble " + spectra::to_string(spec.kind));
}

free::Regime regime_for(const ExperimentConfig& config, std::size_t d) {
  MarginalLaw law = limit_law(sized(config), config.p_max);
  if (config.d.diverges()) return free::Regime::growing({std::move(law)});
  return free::Regime::fixed(static_cast<int>(d), {std::move(law)});
}

ExpectationModel resolve_expectation(const ExperimentConfig& config) {
  ExpectationModel m = config.expectation;
  const EnsembleSpec spec = sized(config);
  if (m.mode == ExpectationMode::AnalyticTwirl && config.expectation_from_ensemble) {
    const auto stats = rng::twirl_statistics(spec);
    m.mean_trace_squared = stats.mean_trace_squared;
    m.mean_trace_of_square = stats.mean_trace_of_square;
  }
  if (m.mode == ExpectationMode::Empirical) {
    m.spec = spec;
    m.seed = Seed(config.seed_root ^ kEmpiricalSalt, 0);
  }
  return m;
}

SimulationResult simulate(const ExperimentConfig& config, const RunOptions& options) {
  validate(config);
  SimulationResult r;
  r.config = config;
  r.d = config.d.resolve(config.n);
  r.dense = use_dense(config, options);
  const EnsembleSpec spec = sized(config);
  ExpectationModel model = resolve_expectation(config);
  if (r.dense) model = channel::with_cached_expectation(model, config.n);
  const int p_max = config.p_max;

  std::size_t threads = options.threads;
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());

  auto outputs = run_trials(config.trials, threads, [&](std::size_t t) {
    TrialOutput out;
    const Seed seed(config.seed_root, t);
    const auto family = rng::sample_family(spec, r.d, seed);
    DeltaOperator delta =
        channel::build_delta(family, model, r.dense ? DeltaForm::Dense : DeltaForm::MatrixFree, &spec);
    out.warnings = delta.warnings;
    if (r.dense) {
      const Spectrum s = linalg::superoperator_eigenvalues(*delta.dense);
      delta.dense.reset();
      out.esd = stats::esd_from_spectrum(s, seed);
      out.moments = stats::empirical_moments(out.esd, p_max);
    } else {
      const auto est =
          linalg::hutchinson_normalized_trace_powers(*delta.matfree, p_max, config.probes, Seed(config.seed_root ^ kProbeSalt, t));
      for (const auto& e : est) {
        out.moments.push_back(e.value);
        out.std_errors.push_back(e.std_error);
      }
    }
    return out;
  });

  for (auto& out : outputs) {
    for (auto& w : out.warnings) {
      if (std::find(r.warnings.begin(), r.warnings.end(), w) == r.warnings.end()) r.warnings.push_back(w);
    }
    r.trial_moments.push_back(std::move(out.moments));
    if (r.dense) {
      r.trial_esds.push_back(std::move(out.esd));
    } else {
      r.trial_moment_std_errors.push_back(std::move(out.std_errors));
    }
  }

  if (r.dense && r.trial_esds.size() >= 2) {
    r.aggregate = stats::aggregate_trials(r.trial_esds, p_max);
  } else {
    r.aggregate = stats::aggregate_moment_rows(r.trial_moments);
    if (r.dense) {
      r.aggregate.pooled = r.trial_esds.front();
    } else if (config.trials == 1) {
      r.aggregate.moment_std_error = r.trial_moment_std_errors.front();
      r.notes.push_back("single matrix-free trial: stdErr is the Hutchinson probe error only");
    }
  }

  const free::Regime regime = regime_for(config, r.d);
  try {
    r.predicted = free::predict_limit_moments(regime, p_max);
  } catch (const std::invalid_argument& ex) {
    r.notes.push_back(std::string("no limit prediction: ") + ex.what());
  }

  if (r.dense && !r.predicted.empty()) {
    std::optional<DensitySpec> target;
    if (regime.kind == free::Regime::Kind::GrowingD) {
      target = DensitySpec::semicircle();
    } else if (config.ensemble.kind == EnsembleKind::RotatedRademacher && r.d >= 2) {
      target = DensitySpec::dilated_kesten_mckay(static_cast<double>(r.d));
    } else {
      r.notes.push_back("no closed-form limit density for " + regime.name() + " with this law; moments only");
    }
    if (target) r.ks.push_back(stats::ks_distance(r.aggregate.pooled, *target));
  }
  if (!r.dense) r.notes.push_back("matrix-free path: moments are Hutchinson estimates; no ESD, histogram or KS");
  if (config.ensemble.kind == EnsembleKind::WishartCentered) {
    r.notes.push_back("WishartCentered is not rescaled at finite n; its normalization holds only as n grows");
  }
  return r;
}

bool ComparisonResult::pass() const {
  return ks_pass && std::all_of(verdicts.begin(), verdicts.end(), [](const OrderVerdict& v) { return v.pass; });
}

ComparisonResult compare(const ExperimentConfig& config, const RunOptions& options) {
  ComparisonResult c;
  c.simulation = simulate(config, options);
  const SimulationResult& s = c.simulation;
  if (s.predicted.empty()) {
    std::string why = "no limit prediction is available for this configuration";
    for (const auto& note : s.notes) {
      if (note.rfind("no limit prediction", 0) == 0) why = note;
    }
    throw ConfigError(why);
  }
  c.moments.regime = regime_for(config, s.d).name();
  for (int p = 1; p <= config.p_max; ++p) c.moments.orders.push_back(p);
  c.moments.empirical = s.aggregate.mean_moments;
  c.moments.empirical_std_error = s.aggregate.moment_std_error;
  c.moments.predicted = s.predicted;
  if (config.tolerances.empty()) {
    for (double pred : s.predicted) c.tolerances.push_back(0.05 * std::max(1.0, std::abs(pred)));
  } else {
    c.tolerances = config.tolerances;
  }
  c.verdicts = stats::compare_report(c.moments, c.tolerances);
  if (config.ks_threshold) {
    for (const auto& ks : s.ks) {
      if (ks.statistic > *config.ks_threshold) c.ks_pass = false;
    }
  }
  return c;
}

json report_json(const SimulationResult& r) {
  json ks = json::array();
  for (const auto& k : r.ks) {
    ks.push_back({{"target", k.target.describe()}, {"statistic", k.statistic}, {"sampleSize", k.sample_size}});
  }
  const ExpectationModel model = resolve_expectation(r.config);
  json j{{"command", "simulate"},
         {"regime", regime_for(r.config, r.d).name()},
         {"ensemble", spectra::to_string(r.config.ensemble.kind)},
         {"n", r.config.n},
         {"d", r.d},
         {"dRule", r.config.d.describe()},
         {"trials", r.config.trials},
         {"seed", {{"root", r.config.seed_root}}},
         {"expectationModel", model.describe()},
         {"path", r.dense ? "dense" : "matfree"},
         {"moments", moments_json(r)},
         {"ks", ks},
         {"warnings", r.warnings},
         {"notes", r.notes},
         {"config", r.config.to_json()}};
  if (r.config.ensemble.kind == EnsembleKind::GUE) j["ensembleField"] = spectra::to_string(r.config.ensemble.field);
  return j;
}

json report_json(const ComparisonResult& c) {
  json j = report_json(c.simulation);
  j["command"] = "compare";
  json verdicts = json::array();
  for (std::size_t k = 0; k < c.verdicts.size(); ++k) {
    const auto& v = c.verdicts[k];
    verdicts.push_back({{"order", v.order},
                        {"pass", v.pass},
                        {"deviation", v.deviation},
                        {"allowance", v.allowance},
                        {"tolerance", c.tolerances[k]}});
  }
  j["comparison"] = {{"orders", verdicts},
                     {"ksThreshold", c.simulation.config.ks_threshold ? json(*c.simulation.config.ks_threshold)
                                                                      : json(nullptr)},
                     {"ksPass", c.ks_pass},
                     {"pass", c.pass()}};
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
  std::string out = "bin_left,bin_right,count,density\n";
  for (const auto& b : bins) {
    out += fmt(b.left) + "," + fmt(b.right) + "," + std::to_string(b.count) + "," + fmt(b.density) + "\n";
  }
  return out;
}

void write_outputs(const SimulationResult& result, const json& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
  };
  if (result.dense && !result.aggregate.pooled.eigenvalues.empty()) {
    write(dir / result.config.histogram_file,
          histogram_csv(stats::histogram(result.aggregate.pooled, result.config.histogram_bins)));
  }
  write(dir / result.config.report_file, dump(report));
}

std::string moment_table_csv(const free::Regime& regime, int p_max) {
  const auto moments = free::predict_limit_moments(regime, p_max);
  std::string out = "order,predicted,regime\n";
  for (std::size_t k = 0; k < moments.size(); ++k) {
    out += std::to_string(k + 1) + "," + fmt(moments[k]) + "," + regime.name() + "\n";
  }
  return out;
}

DensityTable density_table(const DensitySpec& spec, std::size_t grid_points) {
  if (grid_points < 2) throw std::invalid_argument("density grid needs at least 2 points");
  const double edge = spec.support_edge();
  DensityTable t;
  t.csv = "x,density,cdf\n";
  const double last = static_cast<double>(grid_points - 1);
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double x = -edge + 2.0 * edge * static_cast<double>(k) / last;
    t.csv += fmt(x) + "," + fmt(spec.density(x)) + "," + fmt(spec.cdf(x)) + "\n";
  }
  // Trapezoid over θ with x = edge·sinθ; the transformed integrand is smooth.
  const double h = std::numbers::pi / last;
  double sum = 0.0;
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double w = free::density_edge_weight(spec, -std::numbers::pi / 2.0 + h * static_cast<double>(k));
    sum += (k == 0 || k + 1 == grid_points) ? 0.5 * w : w;
  }
  t.integral = sum * h;
  return t;
}

}  // namespace spectra::runner
