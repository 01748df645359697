// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "spectra/channel.hpp"
#include "spectra/errors.hpp"
#include "spectra/experiment.hpp"
#include "spectra/free_moments.hpp"

using namespace spectra;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

runner::SimulationResult run(const json& config, std::size_t threads = 1) {
  return runner::simulate(runner::ExperimentConfig::from_json(config), {threads, std::nullopt});
}

Outcome nc2_exactness() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  const std::uint64_t expected[] = {1, 2, 5, 14};
  for (int p = 2; p <= 8; p += 2) {
    std::uint64_t brute = 0;
    for (const auto& pairing : oracle::brute_pairings(p)) brute += oracle::pairing_crosses(pairing) ? 0 : 1;
    const std::uint64_t got = free::nc2_count(p);
    ok = ok && got == brute && got == expected[p / 2 - 1];
    detail += "p=" + std::to_string(p) + ":" + std::to_string(got) + "/" + std::to_string(brute) + " ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {ok && secs < 1.0, detail + "time " + num(secs) + "s"};
}

Outcome free_word_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<MarginalLaw> laws{MarginalLaw::rademacher(6), MarginalLaw::semicircle(6)};
  const std::vector<std::vector<double>> moments{oracle::rademacher_moments(6), oracle::semicircle_moments(6)};
  double worst = 0.0;
  std::size_t words = 0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      oracle::AlternatingCentering tau({moments[static_cast<std::size_t>(a)], moments[static_cast<std::size_t>(b)]});
      const std::vector<MarginalLaw> pair{laws[static_cast<std::size_t>(a)], laws[static_cast<std::size_t>(b)]};
      for (int p = 1; p <= 6; ++p) {
        for (int mask = 0; mask < (1 << p); ++mask) {
          std::vector<int> colors;
          for (int k = 0; k < p; ++k) colors.push_back((mask >> k) & 1);
          worst = std::max(worst, std::abs(free::free_word_moment(colors, pair) - tau.word(colors)));
          ++words;
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-12 && secs < 10.0,
          std::to_string(words) + " words, max error " + num(worst) + ", time " + num(secs) + "s"};
}

Outcome fixed_d_rademacher() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = run({{"ensemble", {{"kind", "RotatedRademacher"}}},
                      {"n", 64},
                      {"d", 2},
                      {"trials", 20},
                      {"seedRoot", 3001},
                      {"expectationModel", {{"mode", "AnalyticTwirl"}}}});
  const double m2 = r.aggregate.mean_moments[1];
  const double m4 = r.aggregate.mean_moments[3];
  const double ks = r.ks.empty() ? 1.0 : r.ks.front().statistic;
  const bool target_ok = !r.ks.empty() && r.ks.front().target.kind == DensityKind::DilatedKestenMcKay;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::abs(m2 - 1.0) <= 0.05 && std::abs(m4 - 1.5) <= 0.1 && ks <= 0.08 && target_ok,
          "m2 " + num(m2) + ", m4 " + num(m4) + ", KS " + num(ks) + ", time " + num(secs) + "s"};
}

Outcome dilated_density_convergence() {
  double prev = 1e300;
  bool monotone = true;
  std::string detail;
  for (double d : {4.0, 16.0, 64.0}) {
    const double gap = std::abs(free::km_dilated_density(d, 0.0) - 1.0 / std::numbers::pi);
    monotone = monotone && gap < prev;
    prev = gap;
    detail += "gap(d=" + num(d) + ") " + num(gap) + " ";
  }
  return {monotone && prev < 0.01, detail};
}

Outcome growing_d_gue() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = run({{"ensemble", {{"kind", "GUE"}}}, {"n", 64}, {"d", "n"}, {"trials", 10}, {"seedRoot", 5001}});
  const double m4 = r.aggregate.mean_moments[3];
  const double ks = r.ks.empty() ? 1.0 : r.ks.front().statistic;
  const bool target_ok = !r.ks.empty() && r.ks.front().target.kind == DensityKind::Semicircle;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::abs(m4 - 2.0) <= 0.15 && ks <= 0.05 && target_ok && r.d == 64,
          "m4 " + num(m4) + ", KS " + num(ks) + ", time " + num(secs) + "s"};
}

Outcome fixed_d_gue() {
  const double predicted = free::tensor_convolution_moment(4, 4, {MarginalLaw::semicircle(4)}, true);
  const double oracle = oracle::brute_tensor_moment(4, 4, std::vector<std::vector<double>>(4, oracle::semicircle_moments(4)));
  const auto r = run({{"ensemble", {{"kind", "GUE"}}}, {"n", 64}, {"d", 4}, {"trials", 30}, {"seedRoot", 6001}});
  const double m4 = r.aggregate.mean_moments[3];
  return {std::abs(predicted - 2.5) <= 1e-12 && std::abs(oracle - 2.5) <= 1e-12 && std::abs(m4 - predicted) <= 0.15,
          "predicted " + num(predicted) + " (oracle " + num(oracle) + "), m4 " + num(m4)};
}

Outcome centering_consistency() {
  json base{{"ensemble", {{"kind", "GUE"}}}, {"n", 64}, {"d", 1}, {"trials", 10}, {"seedRoot", 7001}};
  json zero = base, centered = base;
  zero["expectationModel"] = {{"mode", "Zero"}};
  centered["expectationModel"] = {{"mode", "AnalyticGUE"}};
  const double mz = run(zero).aggregate.mean_moments[3];
  const auto rc = run(centered);
  const double mc = rc.aggregate.mean_moments[3];
  const double se = rc.aggregate.moment_std_error[3];
  const bool near = std::abs(mz - 4.0) <= 0.1 + 3.0 * se && std::abs(mc - 4.0) <= 0.1 + 3.0 * se;
  return {std::abs(mz - mc) < 0.1 && near,
          "m4 Zero " + num(mz) + ", AnalyticGUE " + num(mc) + ", diff " + num(std::abs(mz - mc)) + ", stdErr " + num(se)};
}

Outcome channel_exactness() {
  const auto rr = channel::kraus_defects(KrausSet::sample({EnsembleKind::RotatedRademacher, 64}, 8, Seed(8001, 0)));
  double at4 = 0.0, at32 = 0.0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    at4 += channel::kraus_defects(KrausSet::sample({EnsembleKind::GUE, 64}, 4, Seed(8002, t))).trace_preserving / 50.0;
    at32 += channel::kraus_defects(KrausSet::sample({EnsembleKind::GUE, 64}, 32, Seed(8003, t))).trace_preserving / 50.0;
  }
  return {rr.trace_preserving <= 1e-9 && rr.unital <= 1e-9 && at32 < at4,
          "Rademacher TP " + num(rr.trace_preserving) + ", unital " + num(rr.unital) + "; GUE mean defect d=4 " + num(at4) +
              ", d=32 " + num(at32)};
}

// Largest entrywise |MC mean − expected| / SE over entries whose samples vary.
double max_z(const EnsembleSpec& spec, std::size_t draws, const ComplexMatrix& expected, std::uint64_t root) {
  const Index big = spec.n * spec.n;
  ComplexMatrix sum = ComplexMatrix::Zero(big, big);
  Eigen::MatrixXd sq_re = Eigen::MatrixXd::Zero(big, big), sq_im = Eigen::MatrixXd::Zero(big, big);
  for (std::uint64_t s = 0; s < draws; ++s) {
    const auto w = rng::sample_hermitian(spec, Seed(root, s)).matrix();
    const ComplexMatrix k = oracle::kron(w, w.conjugate());
    sum += k;
    sq_re += k.real().cwiseAbs2();
    sq_im += k.imag().cwiseAbs2();
  }
  const double n = static_cast<double>(draws);
  double worst = 0.0;
  for (Index i = 0; i < big; ++i) {
    for (Index j = 0; j < big; ++j) {
      const Complex mean = sum(i, j) / n;
      const double se_re = std::sqrt(std::max(0.0, sq_re(i, j) / n - mean.real() * mean.real()) / (n - 1.0));
      const double se_im = std::sqrt(std::max(0.0, sq_im(i, j) / n - mean.imag() * mean.imag()) / (n - 1.0));
      const double dr = std::abs(mean.real() - expected(i, j).real());
      const double di = std::abs(mean.imag() - expected(i, j).imag());
      if (dr > 1e-12) worst = std::max(worst, se_re > 0 ? dr / se_re : 1e9);
      if (di > 1e-12) worst = std::max(worst, se_im > 0 ? di / se_im : 1e9);
    }
  }
  return worst;
}

Outcome expectation_models() {
  const Index n = 4;
  const double z_real =
      max_z({EnsembleKind::GUE, n, {}, WignerField::Real}, 20000, channel::expected_tensor_gue(n).matrix.matrix(), 9001);
  const double z_complex = max_z({EnsembleKind::GUE, n, {}, WignerField::Complex}, 20000,
                                 channel::expected_tensor_gue(n, WignerField::Complex).matrix.matrix(), 9002);
  bool mult_ok = true;
  for (Index m : {2, 3, 4, 5}) {
    ComplexMatrix f = ComplexMatrix::Zero(m * m, m * m);
    for (Index k = 0; k < m; ++k)
      for (Index l = 0; l < m; ++l)
        if (k != l) f(k * m + l, l * m + k) = 1.0;
    int neg = 0, zero = 0, pos = 0;
    for (double v : linalg::hermitian_eigenvalues(HermitianMatrix(std::move(f))).values) {
      if (std::abs(v + 1.0) < 1e-10) ++neg;
      else if (std::abs(v) < 1e-10) ++zero;
      else if (std::abs(v - 1.0) < 1e-10) ++pos;
    }
    mult_ok = mult_ok && neg == m * (m - 1) / 2 && pos == m * (m - 1) / 2 && zero == m;
  }
  return {z_real <= 3.0 && z_complex <= 3.0 && mult_ok,
          "max z real field " + num(z_real) + ", complex field " + num(z_complex) +
              ", flip multiplicities " + (mult_ok ? "exact" : "wrong")};
}

Outcome cross_path() {
  json config{{"ensemble", {{"kind", "GUE"}}}, {"n", 16}, {"d", 4}, {"trials", 8}, {"seedRoot", 10001}, {"probes", 256}};
  json dense = config, matfree = config;
  dense["path"] = "dense";
  matfree["path"] = "matfree";
  const auto a = run(dense);
  const auto b = run(matfree);
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < 4; ++k) {
    const double se = std::hypot(a.aggregate.moment_std_error[k], b.aggregate.moment_std_error[k]);
    const double dev = std::abs(a.aggregate.mean_moments[k] - b.aggregate.mean_moments[k]);
    ok = ok && dev <= 3.0 * se;
    detail += "p=" + std::to_string(k + 1) + " |dev| " + num(dev) + " vs 3se " + num(3.0 * se) + "; ";
  }
  return {ok, detail};
}

Outcome variance_trend() {
  double prev = 1e300;
  bool ok = true;
  std::string detail;
  for (Index n : {16, 32, 64}) {
    std::vector<double> tau2;
    for (std::uint64_t t = 0; t < 30; ++t) {
      const auto family = rng::sample_family({EnsembleKind::GUE, n}, 8, Seed(11001, t));
      const auto delta = channel::build_delta(family, ExpectationModel::analytic_gue(), DeltaForm::Dense);
      tau2.push_back(delta.dense->matrix().squaredNorm() / static_cast<double>(n * n));
    }
    const auto ms = oracle::mean_se(tau2);
    const double var = ms.se * ms.se * 30.0;
    ok = ok && var < prev;
    prev = var;
    detail += "var(n=" + std::to_string(n) + ") " + num(var) + " ";
  }
  return {ok, detail};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const auto root = std::filesystem::temp_directory_path() / "spectra_acceptance_repro";
  std::filesystem::remove_all(root);
  bool ok = true;
  std::size_t compared = 0;
  const std::vector<json> configs{
      {{"ensemble", {{"kind", "RotatedRademacher"}}}, {"n", 16}, {"d", 2}, {"trials", 12}, {"seedRoot", 12001}},
      {{"ensemble", {{"kind", "WishartCentered"}}}, {"n", 8}, {"d", "sqrt-n"}, {"trials", 9}, {"seedRoot", 12002}},
      {{"ensemble", {{"kind", "GUE"}}}, {"n", 24}, {"d", 3}, {"trials", 10}, {"seedRoot", 12003}, {"path", "matfree"}}};
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<std::filesystem::path> dirs;
    for (std::size_t threads : {1, 1, 8, 8}) {
      const auto dir = root / (std::to_string(c) + "_" + std::to_string(dirs.size()));
      const auto r = run(configs[c], threads);
      runner::write_outputs(r, runner::report_json(r), dir);
      dirs.push_back(dir);
    }
    for (const auto& entry : std::filesystem::directory_iterator(dirs.front())) {
      const std::string ref = slurp(entry.path());
      for (std::size_t k = 1; k < dirs.size(); ++k) {
        ok = ok && slurp(dirs[k] / entry.path().filename()) == ref;
        ++compared;
      }
    }
  }
  std::filesystem::remove_all(root);
  return {ok && compared > 0, std::to_string(compared) + " file pairs compared at 1 and 8 threads"};
}

}  // namespace

int main() {
  linalg::set_blas_threads(1);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"nc2 counts match brute-force noncrossing pairings", nc2_exactness},
      {"free word moments match the alternating-centering oracle", free_word_oracle},
      {"fixed-d Rademacher channel (n=64, d=2)", fixed_d_rademacher},
      {"dilated Kesten-McKay density at 0 tends to 1/pi", dilated_density_convergence},
      {"growing-d GUE channel (n=64, d=n)", growing_d_gue},
      {"fixed-d GUE 4th moment (n=64, d=4)", fixed_d_gue},
      {"d=1 centering does not change the 4th moment", centering_consistency},
      {"Kraus defects", channel_exactness},
      {"expected tensors versus Monte Carlo", expectation_models},
      {"Hutchinson versus dense moments (n=16)", cross_path},
      {"variance of tau(Delta^2) decreases in n", variance_trend},
      {"byte-identical outputs across runs and thread counts", reproducibility},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu: %s: %s [%s]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
