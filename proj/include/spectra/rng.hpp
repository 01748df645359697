#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "spectra/linalg.hpp"

namespace spectra {

// Randomness key: identical (root, stream) pairs reproduce identical samples
// no matter which thread draws them.
class Seed {
 public:
  constexpr Seed() = default;
  constexpr Seed(std::uint64_t root, std::uint64_t stream) : root_(root), stream_(stream) {}

  constexpr std::uint64_t root() const { return root_; }
  constexpr std::uint64_t stream() const { return stream_; }

  // Child key for sub-stream `index` of this stream (e.g. family member i of trial t).
  constexpr Seed with_stream(std::uint64_t stream) const { return Seed(root_, stream); }

  friend constexpr bool operator==(const Seed&, const Seed&) = default;

 private:
  std::uint64_t root_ = 0;
  std::uint64_t stream_ = 0;
};

namespace rng {

// Counter-based generator: output k is a SplitMix64 finalizer applied to
// key + (k+1)·γ, where key mixes (root, stream). Satisfies
// UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(const Seed& seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rng

enum class EnsembleKind { RotatedRademacher, GUE, WishartCentered, RotatedDeterministic, Ginibre };

// Entry field of the Wigner ensemble. Complex is the unitary ensemble
// (E W_kl² = 0 off the diagonal); Real has all entries i.i.d. real Gaussians
// of variance 1/n, for which E(W ⊗ conj W) = ψψ* + (F − diag F)/n.
enum class WignerField { Complex, Real };

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::GUE;
  Index n = 1;
  std::vector<double> spectrum;  // RotatedDeterministic only; length n
  WignerField field = WignerField::Complex;  // GUE only

  // Throws ConfigError on violated invariants.
  void validate() const;
  bool is_hermitian() const { return kind != EnsembleKind::Ginibre; }
};

std::string to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& name);
std::string to_string(WignerField field);
WignerField wigner_field_from_string(const std::string& name);

struct MatrixSample {
  std::variant<HermitianMatrix, ComplexMatrix> matrix;
  EnsembleSpec spec;
  Seed seed;
};

namespace rng {

// Entries i.i.d. complex Gaussian, mean 0, E|z|² = 1/n.
ComplexMatrix sample_ginibre(Index n, const Seed& seed);
ComplexMatrix sample_ginibre(Index n, CounterRng& gen);

// QR of a Ginibre draw with Q rephased so that R has positive real diagonal.
ComplexMatrix sample_haar_unitary(Index n, const Seed& seed);
ComplexMatrix sample_haar_unitary(Index n, CounterRng& gen);

// U diag(ε) U* with ε i.i.d. uniform ±1.
HermitianMatrix sample_rotated_rademacher(Index n, const Seed& seed);

HermitianMatrix sample_gue(Index n, const Seed& seed, WignerField field = WignerField::Complex);

// X X* − Id with X Ginibre.
HermitianMatrix sample_wishart_centered(Index n, const Seed& seed);

// U diag(spectrum) U*.
HermitianMatrix sample_rotated_deterministic(std::span<const double> spectrum, const Seed& seed);

HermitianMatrix sample_hermitian(const EnsembleSpec& spec, const Seed& seed);
MatrixSample sample(const EnsembleSpec& spec, const Seed& seed);

// d i.i.d. samples; member i uses stream seed.stream()*d + i.
std::vector<HermitianMatrix> sample_family(const EnsembleSpec& spec, std::size_t d,
                                           const Seed& seed);

// Exact (E (tr A)², E tr(A²)) for unitarily invariant Hermitian ensembles,
// the inputs of the Haar twirl expectation. Throws ConfigError for ensembles
// that are not conjugation invariant (real Wigner, Ginibre).
struct TwirlStatistics {
  double mean_trace_squared = 0.0;
  double mean_trace_of_square = 0.0;
};
TwirlStatistics twirl_statistics(const EnsembleSpec& spec);

}  // namespace rng
}  // namespace spectra
