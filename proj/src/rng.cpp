#include "spectra/rng.hpp"

#include <cmath>
#include <random>
#include <string>

#include "spectra/errors.hpp"

namespace spectra {
namespace rng {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31U);
}

}  // namespace

CounterRng::CounterRng(const Seed& seed)
    : key_(mix64(mix64(seed.root() + kGolden) ^ (seed.stream() * 0xD1B54A32D192ED03ULL + 1U))) {}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

}  // namespace rng

std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::RotatedRademacher: return "RotatedRademacher";
    case EnsembleKind::GUE: return "GUE";
    case EnsembleKind::WishartCentered: return "WishartCentered";
    case EnsembleKind::RotatedDeterministic: return "RotatedDeterministic";
    case EnsembleKind::Ginibre: return "Ginibre";
  }
  return "unknown";
}

EnsembleKind ensemble_kind_from_string(const std::string& name) {
  for (auto kind : {EnsembleKind::RotatedRademacher, EnsembleKind::GUE, EnsembleKind::WishartCentered,
                    EnsembleKind::RotatedDeterministic, EnsembleKind::Ginibre}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown ensemble kind '" + name + "'");
}

std::string to_string(WignerField field) { return field == WignerField::Real ? "real" : "complex"; }

WignerField wigner_field_from_string(const std::string& name) {
  if (name == "complex") return WignerField::Complex;
  if (name == "real") return WignerField::Real;
  throw ConfigError("unknown Wigner entry field '" + name + "' (expected complex or real)");
}

void EnsembleSpec::validate() const {
  if (n < 1) throw ConfigError("ensemble dimension n must be >= 1");
  if (kind == EnsembleKind::RotatedDeterministic) {
    if (static_cast<Index>(spectrum.size()) != n) {
      throw ConfigError("RotatedDeterministic spectrum has " + std::to_string(spectrum.size()) +
                        " entries, expected n = " + std::to_string(n));
    }
    for (double v : spectrum) {
      if (!std::isfinite(v)) throw ConfigError("RotatedDeterministic spectrum has a non-finite entry");
    }
  }
}

namespace rng {
namespace {

// U diag(values) U*.
ComplexMatrix conjugate_diagonal(const ComplexMatrix& u, const Eigen::VectorXd& values) {
  ComplexMatrix scaled = u * values.cast<Complex>().asDiagonal();
  return scaled * u.adjoint();
}

}  // namespace

ComplexMatrix sample_ginibre(Index n, CounterRng& gen) {
  if (n < 1) throw DimensionError("sample_ginibre: n must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0 * static_cast<double>(n)));
  ComplexMatrix x(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double re = normal(gen);
      const double im = normal(gen);
      x(i, j) = Complex(re, im);
    }
  }
  return x;
}

ComplexMatrix sample_ginibre(Index n, const Seed& seed) {
  CounterRng gen(seed);
  return sample_ginibre(n, gen);
}

ComplexMatrix sample_haar_unitary(Index n, CounterRng& gen) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ComplexMatrix z = sample_ginibre(n, gen);
    Eigen::HouseholderQR<ComplexMatrix> qr(z);
    const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
    bool singular = false;
    for (Index k = 0; k < n; ++k) {
      const double mag = std::abs(r(k, k));
      if (!(mag > 1e-300)) {
        singular = true;
        break;
      }
      q.col(k) *= r(k, k) / mag;
    }
    if (!singular) return q;
  }
  throw NumericalError("sample_haar_unitary: singular Ginibre draw twice in a row");
}

ComplexMatrix sample_haar_unitary(Index n, const Seed& seed) {
  CounterRng gen(seed);
  return sample_haar_unitary(n, gen);
}

HermitianMatrix sample_rotated_rademacher(Index n, const Seed& seed) {
  if (n < 1) throw DimensionError("sample_rotated_rademacher: n must be >= 1");
  CounterRng gen(seed);
  Eigen::VectorXd signs(n);
  std::uint64_t bits = 0;
  for (Index k = 0; k < n; ++k) {
    if (k % 64 == 0) bits = gen();
    signs[k] = (bits & 1U) != 0 ? 1.0 : -1.0;
    bits >>= 1U;
  }
  const ComplexMatrix u = sample_haar_unitary(n, gen);
  return HermitianMatrix(conjugate_diagonal(u, signs));
}

HermitianMatrix sample_gue(Index n, const Seed& seed, WignerField field) {
  if (n < 1) throw DimensionError("sample_gue: n must be >= 1");
  CounterRng gen(seed);
  const double nd = static_cast<double>(n);
  std::normal_distribution<double> diag(0.0, 1.0 / std::sqrt(nd));
  std::normal_distribution<double> half(0.0, 1.0 / std::sqrt(2.0 * nd));
  ComplexMatrix w(n, n);
  for (Index k = 0; k < n; ++k) {
    w(k, k) = diag(gen);
    for (Index l = k + 1; l < n; ++l) {
      Complex z;
      if (field == WignerField::Complex) {
        const double re = half(gen);
        const double im = half(gen);
        z = Complex(re, im);
      } else {
        z = diag(gen);
      }
      w(k, l) = z;
      w(l, k) = std::conj(z);
    }
  }
  return HermitianMatrix(std::move(w));
}

HermitianMatrix sample_wishart_centered(Index n, const Seed& seed) {
  const ComplexMatrix x = sample_ginibre(n, seed);
  ComplexMatrix w = x * x.adjoint();
  w.diagonal().array() -= 1.0;
  return HermitianMatrix(std::move(w));
}

HermitianMatrix sample_rotated_deterministic(std::span<const double> spectrum, const Seed& seed) {
  if (spectrum.empty()) throw DimensionError("sample_rotated_deterministic: empty spectrum");
  const auto n = static_cast<Index>(spectrum.size());
  Eigen::VectorXd values(n);
  for (Index k = 0; k < n; ++k) {
    const double v = spectrum[static_cast<std::size_t>(k)];
    if (!std::isfinite(v)) throw DimensionError("sample_rotated_deterministic: non-finite entry");
    values[k] = v;
  }
  CounterRng gen(seed);
  const ComplexMatrix u = sample_haar_unitary(n, gen);
  return HermitianMatrix(conjugate_diagonal(u, values));
}

HermitianMatrix sample_hermitian(const EnsembleSpec& spec, const Seed& seed) {
  spec.validate();
  switch (spec.kind) {
    case EnsembleKind::RotatedRademacher: return sample_rotated_rademacher(spec.n, seed);
    case EnsembleKind::GUE: return sample_gue(spec.n, seed, spec.field);
    case EnsembleKind::WishartCentered: return sample_wishart_centered(spec.n, seed);
    case EnsembleKind::RotatedDeterministic: return sample_rotated_deterministic(spec.spectrum, seed);
    case EnsembleKind::Ginibre: break;
  }
  throw ConfigError("ensemble " + to_string(spec.kind) + " does not produce Hermitian matrices");
}

MatrixSample sample(const EnsembleSpec& spec, const Seed& seed) {
  spec.validate();
  if (spec.kind == EnsembleKind::Ginibre) return {sample_ginibre(spec.n, seed), spec, seed};
  return {sample_hermitian(spec, seed), spec, seed};
}

std::vector<HermitianMatrix> sample_family(const EnsembleSpec& spec, std::size_t d, const Seed& seed) {
  if (d < 1) throw DimensionError("sample_family: d must be >= 1");
  std::vector<HermitianMatrix> family;
  family.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    family.push_back(sample_hermitian(spec, seed.with_stream(seed.stream() * d + i)));
  }
  return family;
}

TwirlStatistics twirl_statistics(const EnsembleSpec& spec) {
  spec.validate();
  const double n = static_cast<double>(spec.n);
  switch (spec.kind) {
    case EnsembleKind::RotatedRademacher:
      // E(Σε)² = n, tr(W²) = n.
      return {n, n};
    case EnsembleKind::GUE:
      if (spec.field == WignerField::Complex) return {1.0, n};
      break;
    case EnsembleKind::WishartCentered:
      // Var tr(XX*) = 1 and E tr((XX*)²) = 2n for square complex Ginibre X.
      return {1.0, n};
    case EnsembleKind::RotatedDeterministic: {
      double sum = 0.0;
      double sum_sq = 0.0;
      for (double v : spec.spectrum) {
        sum += v;
        sum_sq += v * v;
      }
      return {sum * sum, sum_sq};
    }
    case EnsembleKind::Ginibre: break;
  }
  throw ConfigError("ensemble " + to_string(spec.kind) + " (" + to_string(spec.field) +
                    ") is not unitarily invariant; no twirl expectation");
}

}  // namespace rng
}  // namespace spectra
