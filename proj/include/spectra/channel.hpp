#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spectra/linalg.hpp"
#include "spectra/rng.hpp"

namespace spectra {

// Kraus operators K_i = W_i / √d of a Hermitian-Kraus channel.
struct KrausSet {
  Index n = 0;
  std::vector<HermitianMatrix> operators;
  EnsembleSpec source_spec;
  Seed seed;

  std::size_t d() const { return operators.size(); }

  // K_i = W_i / √d for a sampled family. Throws DimensionError on an empty
  // family or mismatched dimensions.
  static KrausSet from_family(const std::vector<HermitianMatrix>& family, EnsembleSpec spec = {},
                              Seed seed = {});
  static KrausSet sample(const EnsembleSpec& spec, std::size_t d, const Seed& seed);
};

// M_Φ = Σ K_i ⊗ conj(K_i), an n² × n² Hermitian matrix.
struct ChannelMatrix {
  Index n = 0;
  HermitianMatrix matrix = HermitianMatrix::zero(1);
};

enum class ExpectationMode { AnalyticGUE, AnalyticTwirl, Empirical, Zero };

// How E(W_i ⊗ conj W_i) is supplied when centering Δ.
struct ExpectationModel {
  ExpectationMode mode = ExpectationMode::Zero;
  WignerField field = WignerField::Complex;  // AnalyticGUE
  double mean_trace_squared = 0.0;           // AnalyticTwirl: E (tr W)²
  double mean_trace_of_square = 0.0;         // AnalyticTwirl: E tr(W²)
  std::size_t trials = 1;                    // Empirical
  EnsembleSpec spec;                         // Empirical
  Seed seed;                                 // Empirical
  // Dense Empirical expectation shared across trials; see with_cached_expectation.
  std::shared_ptr<const HermitianMatrix> cached;

  static ExpectationModel zero() { return {}; }
  static ExpectationModel analytic_gue(WignerField field = WignerField::Complex);
  static ExpectationModel analytic_twirl(double mean_trace_squared, double mean_trace_of_square);
  static ExpectationModel analytic_twirl(const rng::TwirlStatistics& stats);
  static ExpectationModel empirical(const EnsembleSpec& spec, std::size_t trials, const Seed& seed);

  std::string describe() const;
};

std::string to_string(ExpectationMode mode);
ExpectationMode expectation_mode_from_string(const std::string& name);

enum class DeltaForm { Dense, MatrixFree, Both };

// Δ = (1/√d) Σ_i (W_i ⊗ conj W_i − E_i).
struct DeltaOperator {
  Index n = 0;
  std::size_t d = 0;
  std::optional<HermitianMatrix> dense;
  std::optional<MatFreeOperator> matfree;
  ExpectationModel expectation;
  std::vector<std::string> warnings;
};

namespace channel {

// K = K_R + i K_I with K_R = (K + K*)/2 and K_I = −i (K − K*)/2.
std::pair<HermitianMatrix, HermitianMatrix> hermitian_split(const ComplexMatrix& k);

// Throws ResourceGuardError when n² exceeds the dense cap.
ChannelMatrix build_channel_matrix(const KrausSet& ks);

// Σ K_i X K_i.
ComplexMatrix apply_channel(const KrausSet& ks, const ComplexMatrix& x);

struct KrausDefects {
  double trace_preserving = 0.0;  // max |Σ K_i* K_i − Id|
  double unital = 0.0;            // max |Σ K_i K_i* − Id|
};
KrausDefects kraus_defects(const KrausSet& ks);

// ψψ* + (F − diag F)/n: the expectation for real-field Wigner matrices.
ChannelMatrix expected_tensor_gue(Index n);
// Field-aware variant; the complex field gives ψψ*.
ChannelMatrix expected_tensor_gue(Index n, WignerField field);

// α Id + β n ψψ*, with n²α + nβ = E(tr A)² and nα + n²β = E tr(A²).
// Throws DimensionError for n < 2.
ChannelMatrix expected_tensor_twirl(Index n, double mean_trace_squared, double mean_trace_of_square);

struct TwirlCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
};
TwirlCoefficients twirl_coefficients(Index n, double mean_trace_squared, double mean_trace_of_square);

// Monte Carlo mean of W ⊗ conj W over `trials` draws, re-symmetrized.
// Draw t uses stream seed.stream() * trials + t; accumulation in draw order.
ChannelMatrix expected_tensor_empirical(const EnsembleSpec& spec, std::size_t trials,
                                        const Seed& seed);

// The expectation model as a dense n²×n² matrix (Zero gives the zero matrix).
HermitianMatrix expectation_matrix(const ExpectationModel& model, Index n);

// Copy of an Empirical model carrying its dense expectation for dimension n,
// so repeated build_delta calls do not resample it. Other modes are returned unchanged.
ExpectationModel with_cached_expectation(const ExpectationModel& model, Index n);

// Builds Δ. `hint`, when given, names the ensemble so a Zero model can be
// judged; a Zero model without a provably negligible expectation records a
// warning. When both forms are requested they are checked against each other
// on random probes (agreement within 1e-9, else NumericalError).
DeltaOperator build_delta(const std::vector<HermitianMatrix>& family, const ExpectationModel& model,
                          DeltaForm form, const EnsembleSpec* hint = nullptr);

// tr(X) Id/n + (X^T − diag X)/n.
ComplexMatrix expected_channel_map_gue(const ComplexMatrix& x);

}  // namespace channel
}  // namespace spectra
