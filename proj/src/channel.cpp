#include "spectra/channel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "spectra/errors.hpp"

namespace spectra {
namespace {

void check_family(const std::vector<HermitianMatrix>& family, const char* who) {
  if (family.empty()) throw DimensionError(std::string(who) + ": empty family");
  const Index n = family.front().dim();
  for (const auto& w : family) {
    if (w.dim() != n) throw DimensionError(std::string(who) + ": family members differ in dimension");
  }
}

void check_dense_cap(Index n, const char* who) {
  const auto big = static_cast<std::size_t>(n * n);
  if (big > linalg::max_dense_dim()) {
    throw ResourceGuardError(std::string(who) + ": n^2 = " + std::to_string(big) +
                             " exceeds the dense cap " + std::to_string(linalg::max_dense_dim()) +
                             "; use the matrix-free path or raise SPECTRA_MAX_DENSE_DIM");
  }
}

// acc += coeff · (w ⊗ conj w), without a temporary n²×n² matrix.
void add_kron_conj(ComplexMatrix& acc, const ComplexMatrix& w, double coeff) {
  const Index n = w.rows();
  const ComplexMatrix wc = w.conjugate();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      acc.block(i * n, j * n, n, n) += (coeff * w(i, j)) * wc;
    }
  }
}

}  // namespace

KrausSet KrausSet::from_family(const std::vector<HermitianMatrix>& family, EnsembleSpec spec, Seed seed) {
  check_family(family, "KrausSet");
  KrausSet ks;
  ks.n = family.front().dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(family.size()));
  ks.operators.reserve(family.size());
  for (const auto& w : family) ks.operators.emplace_back(ComplexMatrix(scale * w.matrix()));
  ks.source_spec = std::move(spec);
  ks.seed = seed;
  return ks;
}

KrausSet KrausSet::sample(const EnsembleSpec& spec, std::size_t d, const Seed& seed) {
  return from_family(rng::sample_family(spec, d, seed), spec, seed);
}

ExpectationModel ExpectationModel::analytic_gue(WignerField field) {
  ExpectationModel m;
  m.mode = ExpectationMode::AnalyticGUE;
  m.field = field;
  return m;
}

ExpectationModel ExpectationModel::analytic_twirl(double mean_trace_squared, double mean_trace_of_square) {
  ExpectationModel m;
  m.mode = ExpectationMode::AnalyticTwirl;
  m.mean_trace_squared = mean_trace_squared;
  m.mean_trace_of_square = mean_trace_of_square;
  return m;
}

ExpectationModel ExpectationModel::analytic_twirl(const rng::TwirlStatistics& stats) {
  return analytic_twirl(stats.mean_trace_squared, stats.mean_trace_of_square);
}

ExpectationModel ExpectationModel::empirical(const EnsembleSpec& spec, std::size_t trials, const Seed& seed) {
  if (trials < 1) throw ConfigError("Empirical expectation model needs trials >= 1");
  ExpectationModel m;
  m.mode = ExpectationMode::Empirical;
  m.spec = spec;
  m.trials = trials;
  m.seed = seed;
  return m;
}

std::string ExpectationModel::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (mode) {
    case ExpectationMode::AnalyticGUE: out << "AnalyticGUE(" << to_string(field) << ")"; break;
    case ExpectationMode::AnalyticTwirl:
      out << "AnalyticTwirl(meanTraceSquared=" << mean_trace_squared
          << ", meanTraceOfSquare=" << mean_trace_of_square << ")";
      break;
    case ExpectationMode::Empirical: out << "Empirical(trials=" << trials << ")"; break;
    case ExpectationMode::Zero: out << "Zero"; break;
  }
  return out.str();
}

std::string to_string(ExpectationMode mode) {
  switch (mode) {
    case ExpectationMode::AnalyticGUE: return "AnalyticGUE";
    case ExpectationMode::AnalyticTwirl: return "AnalyticTwirl";
    case ExpectationMode::Empirical: return "Empirical";
    case ExpectationMode::Zero: return "Zero";
  }
  return "unknown";
}

ExpectationMode expectation_mode_from_string(const std::string& name) {
  for (auto mode : {ExpectationMode::AnalyticGUE, ExpectationMode::AnalyticTwirl, ExpectationMode::Empirical,
                    ExpectationMode::Zero}) {
    if (name == to_string(mode)) return mode;
  }
  throw ConfigError("unknown expectation model '" + name + "'");
}

namespace channel {

std::pair<HermitianMatrix, HermitianMatrix> hermitian_split(const ComplexMatrix& k) {
  if (k.rows() != k.cols() || k.rows() == 0) throw DimensionError("hermitian_split: matrix must be square");
  const ComplexMatrix adj = k.adjoint();
  ComplexMatrix real_part = 0.5 * (k + adj);
  ComplexMatrix imag_part = Complex(0.0, -0.5) * (k - adj);
  return {HermitianMatrix(std::move(real_part)), HermitianMatrix(std::move(imag_part))};
}

ChannelMatrix build_channel_matrix(const KrausSet& ks) {
  if (ks.operators.empty()) throw DimensionError("build_channel_matrix: empty Kraus set");
  check_dense_cap(ks.n, "build_channel_matrix");
  ComplexMatrix m = ComplexMatrix::Zero(ks.n * ks.n, ks.n * ks.n);
  for (const auto& k : ks.operators) add_kron_conj(m, k.matrix(), 1.0);
  return {ks.n, HermitianMatrix(std::move(m))};
}

ComplexMatrix apply_channel(const KrausSet& ks, const ComplexMatrix& x) {
  if (x.rows() != ks.n || x.cols() != ks.n) {
    throw DimensionError("apply_channel: input must be " + std::to_string(ks.n) + "x" + std::to_string(ks.n));
  }
  ComplexMatrix out = ComplexMatrix::Zero(ks.n, ks.n);
  for (const auto& k : ks.operators) out.noalias() += k.matrix() * x * k.matrix();
  return out;
}

KrausDefects kraus_defects(const KrausSet& ks) {
  const Index n = ks.n;
  ComplexMatrix tp = -ComplexMatrix::Identity(n, n);
  ComplexMatrix unital = -ComplexMatrix::Identity(n, n);
  for (const auto& k : ks.operators) {
    tp.noalias() += k.matrix().adjoint() * k.matrix();
    unital.noalias() += k.matrix() * k.matrix().adjoint();
  }
  return {linalg::max_abs_entry(tp), linalg::max_abs_entry(unital)};
}

ChannelMatrix expected_tensor_gue(Index n, WignerField field) {
  if (n < 1) throw DimensionError("expected_tensor_gue: n must be >= 1");
  check_dense_cap(n, "expected_tensor_gue");
  const double inv_n = 1.0 / static_cast<double>(n);
  ComplexMatrix e = ComplexMatrix::Zero(n * n, n * n);
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < n; ++l) {
      // ψψ* = (1/n) Σ E_kl ⊗ E_kl.
      e(k * n + k, l * n + l) += inv_n;
      // (F − diag F)/n = (1/n) Σ_{k≠l} E_kl ⊗ E_lk.
      if (field == WignerField::Real && k != l) e(k * n + l, l * n + k) += inv_n;
    }
  }
  return {n, HermitianMatrix(std::move(e))};
}

ChannelMatrix expected_tensor_gue(Index n) { return expected_tensor_gue(n, WignerField::Real); }

TwirlCoefficients twirl_coefficients(Index n, double mean_trace_squared, double mean_trace_of_square) {
  if (n < 2) throw DimensionError("expected_tensor_twirl: singular system for n < 2");
  const double nd = static_cast<double>(n);
  // [n² n; n n²] [α; β] = [E(trA)²; E tr A²].
  const double det = nd * (nd * nd - 1.0);
  return {(nd * mean_trace_squared - mean_trace_of_square) / det,
          (nd * mean_trace_of_square - mean_trace_squared) / det};
}

ChannelMatrix expected_tensor_twirl(Index n, double mean_trace_squared, double mean_trace_of_square) {
  const auto [alpha, beta] = twirl_coefficients(n, mean_trace_squared, mean_trace_of_square);
  check_dense_cap(n, "expected_tensor_twirl");
  ComplexMatrix e = ComplexMatrix::Zero(n * n, n * n);
  e.diagonal().array() += alpha;
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < n; ++l) e(k * n + k, l * n + l) += beta;
  }
  return {n, HermitianMatrix(std::move(e))};
}

ChannelMatrix expected_tensor_empirical(const EnsembleSpec& spec, std::size_t trials, const Seed& seed) {
  if (trials < 1) throw DimensionError("expected_tensor_empirical: trials must be >= 1");
  spec.validate();
  check_dense_cap(spec.n, "expected_tensor_empirical");
  const Index big = spec.n * spec.n;
  ComplexMatrix acc = ComplexMatrix::Zero(big, big);
  const double weight = 1.0 / static_cast<double>(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const HermitianMatrix w = rng::sample_hermitian(spec, seed.with_stream(seed.stream() * trials + t));
    add_kron_conj(acc, w.matrix(), weight);
  }
  for (Index i = 0; i < big; ++i) {
    acc(i, i) = acc(i, i).real();
    for (Index j = i + 1; j < big; ++j) {
      const Complex avg = 0.5 * (acc(i, j) + std::conj(acc(j, i)));
      acc(i, j) = avg;
      acc(j, i) = std::conj(avg);
    }
  }
  return {spec.n, HermitianMatrix(std::move(acc))};
}

namespace {

EnsembleSpec empirical_spec_for(const ExpectationModel& model, Index n) {
  EnsembleSpec spec = model.spec;
  if (spec.kind != EnsembleKind::RotatedDeterministic) spec.n = n;
  if (spec.n != n) {
    throw DimensionError("Empirical expectation model ensemble has n = " + std::to_string(spec.n) +
                         ", family has n = " + std::to_string(n));
  }
  return spec;
}

}  // namespace

HermitianMatrix expectation_matrix(const ExpectationModel& model, Index n) {
  switch (model.mode) {
    case ExpectationMode::Zero:
      check_dense_cap(n, "expectation_matrix");
      return HermitianMatrix::zero(n * n);
    case ExpectationMode::AnalyticGUE: return expected_tensor_gue(n, model.field).matrix;
    case ExpectationMode::AnalyticTwirl:
      return expected_tensor_twirl(n, model.mean_trace_squared, model.mean_trace_of_square).matrix;
    case ExpectationMode::Empirical:
      return expected_tensor_empirical(empirical_spec_for(model, n), model.trials, model.seed).matrix;
  }
  throw ConfigError("expectation_matrix: unknown mode");
}

namespace {

bool zero_model_negligible(const EnsembleSpec* hint) {
  if (hint == nullptr) return false;
  switch (hint->kind) {
    case EnsembleKind::GUE:
    case EnsembleKind::RotatedRademacher:
    case EnsembleKind::WishartCentered: return true;
    case EnsembleKind::RotatedDeterministic: {
      if (hint->spectrum.empty()) return false;
      double mean = 0.0;
      for (double v : hint->spectrum) mean += v;
      mean /= static_cast<double>(hint->spectrum.size());
      return std::abs(mean) <= 1e-12;
    }
    case EnsembleKind::Ginibre: return false;
  }
  return false;
}

// −√d·E as a structured shift, for the analytic models.
std::optional<StructuredShift> structured_shift_for(const ExpectationModel& model, Index n, std::size_t count) {
  const double sqrt_d = std::sqrt(static_cast<double>(count));
  switch (model.mode) {
    case ExpectationMode::AnalyticGUE: {
      const double inv_n = 1.0 / static_cast<double>(n);
      return StructuredShift{0.0, -sqrt_d * inv_n, model.field == WignerField::Real ? -sqrt_d * inv_n : 0.0};
    }
    case ExpectationMode::AnalyticTwirl: {
      const auto [alpha, beta] = twirl_coefficients(n, model.mean_trace_squared, model.mean_trace_of_square);
      return StructuredShift{-sqrt_d * alpha, -sqrt_d * beta, 0.0};
    }
    case ExpectationMode::Empirical:
    case ExpectationMode::Zero: break;
  }
  return std::nullopt;
}

void add_structured_shift(ComplexMatrix& acc, Index n, const StructuredShift& s) {
  acc.diagonal().array() += s.identity;
  for (Index k = 0; k < n; ++k) {
    for (Index l = 0; l < n; ++l) {
      acc(k * n + k, l * n + l) += s.trace;
      if (k != l) acc(k * n + l, l * n + k) += s.flip;
    }
  }
}

MatFreeOperator build_matfree(const std::vector<HermitianMatrix>& family, const ExpectationModel& model) {
  const Index n = family.front().dim();
  const double d = static_cast<double>(family.size());
  const double inv_sqrt_d = 1.0 / std::sqrt(d);
  const double sqrt_d = std::sqrt(d);
  MatFreeOperator op(n);
  for (const auto& w : family) op.add_term(inv_sqrt_d, w.matrix(), w.matrix().conjugate());

  if (const auto shift = structured_shift_for(model, n, family.size())) {
    op.set_structured_shift(*shift);
  } else if (model.mode == ExpectationMode::Empirical) {
    const EnsembleSpec spec = empirical_spec_for(model, n);
    const double coeff = -sqrt_d / static_cast<double>(model.trials);
    for (std::size_t t = 0; t < model.trials; ++t) {
      const HermitianMatrix w =
          rng::sample_hermitian(spec, model.seed.with_stream(model.seed.stream() * model.trials + t));
      op.add_term(coeff, w.matrix(), w.matrix().conjugate());
    }
  }
  return op;
}

HermitianMatrix build_dense(const std::vector<HermitianMatrix>& family, const ExpectationModel& model) {
  const Index n = family.front().dim();
  check_dense_cap(n, "build_delta");
  const double d = static_cast<double>(family.size());
  ComplexMatrix acc = ComplexMatrix::Zero(n * n, n * n);
  for (const auto& w : family) add_kron_conj(acc, w.matrix(), 1.0 / std::sqrt(d));
  if (const auto shift = structured_shift_for(model, n, family.size())) {
    add_structured_shift(acc, n, *shift);
  } else if (model.mode == ExpectationMode::Empirical) {
    if (model.cached && model.cached->dim() == n * n) {
      acc -= std::sqrt(d) * model.cached->matrix();
    } else {
      acc -= std::sqrt(d) * expectation_matrix(model, n).matrix();
    }
  }
  return HermitianMatrix(std::move(acc));
}

void check_forms_agree(const HermitianMatrix& dense, const MatFreeOperator& op) {
  rng::CounterRng gen(Seed(0x5EC7A1ULL, 0));
  std::normal_distribution<double> normal;
  for (int probe = 0; probe < 3; ++probe) {
    ComplexVector v(op.dim());
    for (Index i = 0; i < v.size(); ++i) {
      const double re = normal(gen);
      const double im = normal(gen);
      v[i] = Complex(re, im);
    }
    const ComplexVector a = dense.matrix() * v;
    const ComplexVector b = linalg::matfree_apply(op, v);
    const double err = (a - b).norm() / std::max(1.0, a.norm());
    if (err > 1e-9) {
      throw NumericalError("build_delta: dense and matrix-free forms disagree (relative " + std::to_string(err) + ")");
    }
  }
}

}  // namespace

DeltaOperator build_delta(const std::vector<HermitianMatrix>& family, const ExpectationModel& model,
                          DeltaForm form, const EnsembleSpec* hint) {
  check_family(family, "build_delta");
  DeltaOperator delta;
  delta.n = family.front().dim();
  delta.d = family.size();
  delta.expectation = model;
  if (model.mode == ExpectationMode::Zero && !zero_model_negligible(hint)) {
    delta.warnings.push_back("Zero expectation model used for an ensemble whose E(W⊗conj W) is not "
                             "known to be negligible");
  }
  if (form != DeltaForm::MatrixFree) delta.dense = build_dense(family, model);
  if (form != DeltaForm::Dense) delta.matfree = build_matfree(family, model);
  if (delta.dense && delta.matfree) check_forms_agree(*delta.dense, *delta.matfree);
  return delta;
}

ExpectationModel with_cached_expectation(const ExpectationModel& model, Index n) {
  if (model.mode != ExpectationMode::Empirical) return model;
  ExpectationModel out = model;
  out.cached = std::make_shared<const HermitianMatrix>(expectation_matrix(model, n));
  return out;
}

ComplexMatrix expected_channel_map_gue(const ComplexMatrix& x) {
  if (x.rows() != x.cols() || x.rows() == 0) throw DimensionError("expected_channel_map_gue: matrix must be square");
  const Index n = x.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  ComplexMatrix out = inv_n * x.transpose();
  out.diagonal() -= inv_n * x.diagonal();
  out.diagonal().array() += x.trace() * inv_n;
  return out;
}

}  // namespace channel
}  // namespace spectra
