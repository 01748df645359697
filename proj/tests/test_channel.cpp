#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spectra/channel.hpp"
#include "spectra/errors.hpp"

using namespace spectra;

namespace {

ComplexMatrix random_matrix(Index n, std::uint64_t stream) {
  rng::CounterRng gen(Seed(21, stream));
  std::normal_distribution<double> normal;
  ComplexMatrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double re = normal(gen);
      const double im = normal(gen);
      m(i, j) = Complex(re, im);
    }
  return m;
}

// Entrywise z-scores of a Monte Carlo mean of W ⊗ conj W against `expected`.
double max_z(const EnsembleSpec& spec, std::size_t draws, const ComplexMatrix& expected) {
  const Index big = spec.n * spec.n;
  ComplexMatrix sum = ComplexMatrix::Zero(big, big);
  Eigen::MatrixXd sq_re = Eigen::MatrixXd::Zero(big, big), sq_im = Eigen::MatrixXd::Zero(big, big);
  for (std::uint64_t s = 0; s < draws; ++s) {
    const auto w = rng::sample_hermitian(spec, Seed(77, s)).matrix();
    const ComplexMatrix k = linalg::kron(w, w.conjugate());
    sum += k;
    sq_re += k.real().cwiseAbs2();
    sq_im += k.imag().cwiseAbs2();
  }
  const double n = static_cast<double>(draws);
  double worst = 0.0;
  for (Index i = 0; i < big; ++i)
    for (Index j = 0; j < big; ++j) {
      const Complex mean = sum(i, j) / n;
      const double se_re = std::sqrt(std::max(0.0, sq_re(i, j) / n - mean.real() * mean.real()) / n);
      const double se_im = std::sqrt(std::max(0.0, sq_im(i, j) / n - mean.imag() * mean.imag()) / n);
      const double dr = std::abs(mean.real() - expected(i, j).real());
      const double di = std::abs(mean.imag() - expected(i, j).imag());
      if (dr > 1e-12) worst = std::max(worst, se_re > 0 ? dr / se_re : 1e9);
      if (di > 1e-12) worst = std::max(worst, se_im > 0 ? di / se_im : 1e9);
    }
  return worst;
}

}  // namespace

TEST_CASE("hermitian split") {
  const auto h = rng::sample_gue(3, Seed(1, 0)).matrix();
  auto [r, i] = channel::hermitian_split(h);
  CHECK(linalg::max_abs_entry(r.matrix() - h) <= 1e-15);
  CHECK(linalg::max_abs_entry(i.matrix()) <= 1e-15);
  auto [r2, i2] = channel::hermitian_split(Complex(0, 1) * h);
  CHECK(linalg::max_abs_entry(r2.matrix()) <= 1e-15);
  CHECK(linalg::max_abs_entry(i2.matrix() - h) <= 1e-15);
  const auto k = random_matrix(3, 1);
  auto [kr, ki] = channel::hermitian_split(k);
  CHECK(linalg::max_abs_entry(kr.matrix() + Complex(0, 1) * ki.matrix() - k) <= 1e-12);
  CHECK_THROWS_AS(channel::hermitian_split(ComplexMatrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("channel matrix") {
  const auto id = KrausSet::from_family({HermitianMatrix::identity(3)});
  CHECK(channel::build_channel_matrix(id).matrix.matrix() == ComplexMatrix::Identity(9, 9));
  const std::vector<double> s{1.0, -1.0};
  const auto m = channel::build_channel_matrix(KrausSet::from_family({HermitianMatrix::diagonal(s)})).matrix.matrix();
  CHECK(m.diagonal().real().transpose().isApprox(Eigen::RowVector4d(1, -1, -1, 1)));

  const auto ks = KrausSet::sample({EnsembleKind::GUE, 4}, 3, Seed(2, 0));
  const auto cm = channel::build_channel_matrix(ks);
  CHECK(linalg::hermiticity_defect(cm.matrix.matrix()) <= 1e-10);
  for (std::uint64_t probe = 0; probe < 3; ++probe) {
    const auto x = random_matrix(4, 10 + probe);
    const ComplexMatrix got = linalg::unvec(cm.matrix.matrix() * linalg::vec(x), 4);
    CHECK(linalg::max_abs_entry(got - channel::apply_channel(ks, x)) <= 1e-12);
  }
  setenv("SPECTRA_MAX_DENSE_DIM", "10", 1);
  CHECK_THROWS_AS(channel::build_channel_matrix(ks), ResourceGuardError);
  unsetenv("SPECTRA_MAX_DENSE_DIM");
}

TEST_CASE("apply channel") {
  const auto x = random_matrix(4, 20);
  CHECK(channel::apply_channel(KrausSet::from_family({HermitianMatrix::identity(4)}), x) == x);
  const auto ks = KrausSet::sample({EnsembleKind::RotatedRademacher, 6}, 3, Seed(3, 0));
  const auto y = random_matrix(6, 21);
  CHECK(std::abs(channel::apply_channel(ks, y).trace() - y.trace()) <= 1e-9);
  const ComplexMatrix psd = y * y.adjoint();
  const ComplexMatrix out = channel::apply_channel(ks, psd);
  CHECK(linalg::hermitian_eigenvalues(HermitianMatrix(ComplexMatrix(0.5 * (out + out.adjoint())))).values.front() >= -1e-9);
  CHECK_THROWS_AS(channel::apply_channel(ks, random_matrix(5, 22)), DimensionError);
}

TEST_CASE("kraus defects") {
  const auto rr = channel::kraus_defects(KrausSet::sample({EnsembleKind::RotatedRademacher, 16}, 5, Seed(4, 0)));
  CHECK(rr.trace_preserving <= 1e-9);
  CHECK(rr.unital <= 1e-9);
  const auto one = channel::kraus_defects(KrausSet::from_family({HermitianMatrix::identity(4)}));
  CHECK(one.trace_preserving == 0.0);
  const auto gue = channel::kraus_defects(KrausSet::sample({EnsembleKind::GUE, 8}, 3, Seed(5, 0)));
  CHECK(std::abs(gue.trace_preserving - gue.unital) <= 1e-12);

  double at4 = 0, at16 = 0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    at4 += channel::kraus_defects(KrausSet::sample({EnsembleKind::GUE, 64}, 4, Seed(6, t))).trace_preserving;
    at16 += channel::kraus_defects(KrausSet::sample({EnsembleKind::GUE, 64}, 16, Seed(7, t))).trace_preserving;
  }
  CHECK(at16 < 0.9 * at4);
}

TEST_CASE("expected tensor for Wigner matrices") {
  CHECK(channel::expected_tensor_gue(1).matrix.matrix() == ComplexMatrix::Ones(1, 1));
  for (Index n : {2, 3, 5}) {
    const auto e = channel::expected_tensor_gue(n).matrix;
    CHECK(std::abs(e.matrix().trace() - 1.0) <= 1e-12);
    const auto ev = linalg::hermitian_eigenvalues(e).values;
    CHECK(ev.back() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev.front() == doctest::Approx(-1.0 / n).epsilon(1e-12));
  }
  // Complex-field draws match ψψ*, real-field draws match the flip formula.
  CHECK(max_z({EnsembleKind::GUE, 3, {}, WignerField::Complex}, 4000,
              channel::expected_tensor_gue(3, WignerField::Complex).matrix.matrix()) <= 4.5);
  CHECK(max_z({EnsembleKind::GUE, 3, {}, WignerField::Real}, 4000, channel::expected_tensor_gue(3).matrix.matrix()) <= 4.5);
}

TEST_CASE("expected channel map") {
  const auto id = ComplexMatrix::Identity(4, 4);
  CHECK(linalg::max_abs_entry(channel::expected_channel_map_gue(id) - id) <= 1e-15);
  ComplexMatrix e12 = ComplexMatrix::Zero(4, 4);
  e12(0, 1) = 1.0;
  ComplexMatrix e21 = ComplexMatrix::Zero(4, 4);
  e21(1, 0) = 0.25;
  CHECK(linalg::max_abs_entry(channel::expected_channel_map_gue(e12) - e21) <= 1e-15);
  const auto x = random_matrix(3, 30);
  const ComplexMatrix viaTensor = linalg::unvec(channel::expected_tensor_gue(3).matrix.matrix() * linalg::vec(x), 3);
  CHECK(linalg::max_abs_entry(viaTensor - channel::expected_channel_map_gue(x)) <= 1e-10);
}

TEST_CASE("twirl expectation") {
  const auto c = channel::twirl_coefficients(4, 4.0, 4.0);
  CHECK(c.alpha == doctest::Approx(1.0 / 5.0));
  CHECK(c.beta * 4 == doctest::Approx(4.0 / 5.0));
  // A = Id: U Id U* = Id, so the expectation is Id_{n²}.
  const auto e = channel::expected_tensor_twirl(5, 25.0, 5.0).matrix.matrix();
  CHECK(linalg::max_abs_entry(e - ComplexMatrix::Identity(25, 25)) <= 1e-12);
  CHECK_THROWS_AS(channel::expected_tensor_twirl(1, 1.0, 1.0), DimensionError);

  const EnsembleSpec rr{EnsembleKind::RotatedRademacher, 4};
  CHECK(max_z(rr, 50000, channel::expected_tensor_twirl(4, 4.0, 4.0).matrix.matrix()) <= 4.5);
  const EnsembleSpec det{EnsembleKind::RotatedDeterministic, 3, {2.0, -0.5, 1.0}};
  const auto st = rng::twirl_statistics(det);
  CHECK(max_z(det, 20000, channel::expected_tensor_twirl(3, st.mean_trace_squared, st.mean_trace_of_square).matrix.matrix()) <=
        4.5);

  // τ(E^p) → 0 as n grows (centered RotatedRademacher, E(tr A)² = n, E tr A² = n).
  for (int p = 1; p <= 4; ++p) {
    double prev = 1e300;
    for (Index n : {8, 16, 32}) {
      const auto m = channel::expected_tensor_twirl(n, static_cast<double>(n), static_cast<double>(n)).matrix.matrix();
      ComplexMatrix pw = m;
      for (int k = 1; k < p; ++k) pw = pw * m;
      const double v = std::abs(linalg::normalized_trace(pw));
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("empirical expectation") {
  const EnsembleSpec spec{EnsembleKind::GUE, 3};
  const auto one = channel::expected_tensor_empirical(spec, 1, Seed(8, 0)).matrix.matrix();
  const auto w = rng::sample_hermitian(spec, Seed(8, 0)).matrix();
  CHECK(linalg::max_abs_entry(one - linalg::kron(w, w.conjugate())) <= 1e-15);

  const EnsembleSpec g4{EnsembleKind::GUE, 4};
  const std::size_t trials = 10000;
  const auto mc = channel::expected_tensor_empirical(g4, trials, Seed(9, 0)).matrix.matrix();
  const auto exact = channel::expected_tensor_gue(4, WignerField::Complex).matrix.matrix();
  // Entries of W ⊗ conj W have variance ≤ 2/n², so 5σ is below 5·√2/(4·100).
  CHECK(linalg::max_abs_entry(mc - exact) <= 5.0 * std::sqrt(2.0) / (4.0 * std::sqrt(double(trials))));
  CHECK(linalg::hermiticity_defect(mc) == 0.0);
}

TEST_CASE("build delta") {
  const auto d1 = channel::build_delta({HermitianMatrix::identity(3)}, ExpectationModel::zero(), DeltaForm::Both);
  CHECK(d1.dense->matrix() == ComplexMatrix::Identity(9, 9));
  CHECK(d1.warnings.size() == 1);

  const EnsembleSpec gue{EnsembleKind::GUE, 6};
  const auto fam = rng::sample_family(gue, 3, Seed(10, 0));
  CHECK(channel::build_delta(fam, ExpectationModel::zero(), DeltaForm::Dense, &gue).warnings.empty());

  // Scale covariance under the Zero model.
  std::vector<HermitianMatrix> scaled;
  for (const auto& w : fam) scaled.emplace_back(ComplexMatrix(1.7 * w.matrix()));
  const auto a = channel::build_delta(fam, ExpectationModel::zero(), DeltaForm::Dense).dense->matrix();
  const auto b = channel::build_delta(scaled, ExpectationModel::zero(), DeltaForm::Dense).dense->matrix();
  CHECK(linalg::max_abs_entry(b - 1.7 * 1.7 * a) <= 1e-12);

  // Every model: dense equals the explicit formula and the matrix-free form.
  const EnsembleSpec rr{EnsembleKind::RotatedRademacher, 4};
  const auto rfam = rng::sample_family(rr, 3, Seed(11, 0));
  for (const auto& model : {ExpectationModel::zero(), ExpectationModel::analytic_gue(WignerField::Real),
                            ExpectationModel::analytic_gue(WignerField::Complex), ExpectationModel::analytic_twirl(4.0, 4.0),
                            ExpectationModel::empirical(rr, 5, Seed(12, 0))}) {
    const auto delta = channel::build_delta(rfam, model, DeltaForm::Both, &rr);
    ComplexMatrix want = ComplexMatrix::Zero(16, 16);
    const ComplexMatrix e = channel::expectation_matrix(model, 4).matrix();
    for (const auto& w : rfam) want += (oracle::kron(w.matrix(), w.matrix().conjugate()) - e) / std::sqrt(3.0);
    CHECK(linalg::max_abs_entry(delta.dense->matrix() - want) <= 1e-12);
    CHECK(linalg::max_abs_entry(delta.matfree->to_dense() - want) <= 1e-12);
    const auto cached = channel::build_delta(rfam, channel::with_cached_expectation(model, 4), DeltaForm::Dense, &rr);
    CHECK(linalg::max_abs_entry(cached.dense->matrix() - want) <= 1e-12);
  }
  CHECK_THROWS_AS(channel::build_delta({}, ExpectationModel::zero(), DeltaForm::Dense), DimensionError);
}

TEST_CASE("delta centering and fixed-d second moment") {
  std::vector<double> traces;
  const EnsembleSpec gue{EnsembleKind::GUE, 8};
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto delta = channel::build_delta(rng::sample_family(gue, 4, Seed(13, t)), ExpectationModel::analytic_gue(),
                                            DeltaForm::Dense);
    traces.push_back(linalg::normalized_trace(delta.dense->matrix()).real());
  }
  const auto m = oracle::mean_se(traces);
  CHECK(std::abs(m.mean) <= 3.0 * m.se);

  // Empirical centering at a high trial count.
  std::vector<double> etr;
  const EnsembleSpec w4{EnsembleKind::WishartCentered, 4};
  const auto model = channel::with_cached_expectation(ExpectationModel::empirical(w4, 20000, Seed(14, 0)), 4);
  for (std::uint64_t t = 0; t < 400; ++t) {
    const auto delta = channel::build_delta(rng::sample_family(w4, 3, Seed(15, t)), model, DeltaForm::Dense);
    etr.push_back(linalg::normalized_trace(delta.dense->matrix()).real());
  }
  const auto em = oracle::mean_se(etr);
  CHECK(std::abs(em.mean) <= 4.0 * em.se);

  const EnsembleSpec rr{EnsembleKind::RotatedRademacher, 64};
  const auto delta = channel::build_delta(rng::sample_family(rr, 2, Seed(16, 0)),
                                          ExpectationModel::analytic_twirl(rng::twirl_statistics(rr)), DeltaForm::Dense);
  CHECK(std::abs(delta.dense->matrix().squaredNorm() / 4096.0 - 1.0) <= 0.05);
}
