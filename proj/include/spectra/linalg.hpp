#pragma once

// Dense complex matrices, Kronecker products, Hermitian spectra and the
// matrix-free Kronecker-sum operator used for large superoperators.
//
// Vectorization is row-major throughout: vec(X)[i*n + j] = X(i, j). Under
// this convention (A ⊗ B) vec(X) = vec(A X B^T), so the channel matrix
// Σ K ⊗ conj(K) acts on vec(X) as X ↦ Σ K X K*.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spectra {

using Complex = std::complex<double>;
using Index = Eigen::Index;

// General dense complex matrix, row-major storage.
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace linalg {

inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr std::size_t kDefaultMaxDenseDim = 8192;

// Largest side length allowed for dense n^2-dimensional objects. Reads
// SPECTRA_MAX_DENSE_DIM, falling back to kDefaultMaxDenseDim.
std::size_t max_dense_dim();

// Pins the BLAS backend to `threads` threads. Call before spawning workers
// so that results do not depend on BLAS-level threading.
void set_blas_threads(int threads);

// Max-entry magnitude of (m - m*).
double hermiticity_defect(const ComplexMatrix& m);
double max_abs_entry(const ComplexMatrix& m);
bool all_finite(const ComplexMatrix& m);

}  // namespace linalg

// A square matrix equal to its adjoint within
// 1e-10 * max(1, max-entry magnitude). Construction rejects anything else;
// nothing is silently symmetrized.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(ComplexMatrix base);

  static HermitianMatrix identity(Index dim);
  static HermitianMatrix zero(Index dim);
  static HermitianMatrix diagonal(std::span<const double> values);

  Index dim() const { return base_.rows(); }
  const ComplexMatrix& matrix() const { return base_; }
  Complex operator()(Index i, Index j) const { return base_(i, j); }

 private:
  ComplexMatrix base_;
};

// Ascending eigenvalues of a Hermitian matrix.
struct Spectrum {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
};

namespace linalg {

// result((i*b.rows()) + k, (j*b.cols()) + l) = a(i, j) * b(k, l).
// Throws ResourceGuardError when either result dimension exceeds max_dense_dim().
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix entrywise_conj(const ComplexMatrix& a);

// (1/dim) tr(a); throws DimensionError for non-square input.
Complex normalized_trace(const ComplexMatrix& a);

// Row-major vec / unvec.
ComplexVector vec(const ComplexMatrix& x);
ComplexMatrix unvec(const ComplexVector& v, Index n);

// Ascending eigenvalues. Checks Σλ against tr(h) (to 1e-8 * dim) and Σλ²
// against tr(h²) (relative 1e-8); throws NumericalError on solver failure or
// residual violation.
Spectrum hermitian_eigenvalues(const HermitianMatrix& h);

// Eigenvalues of an n²×n² Hermitian superoperator that also preserves
// Hermiticity (S vec(X*) = conj(S vec(X)) entrywise on the swapped index).
// Such an operator is real symmetric in the orthonormal basis
// {E_kk, (E_kl+E_lk)/√2, i(E_kl-E_lk)/√2}, which halves the arithmetic
// and quarters the memory traffic. Falls back to hermitian_eigenvalues when
// the symmetry check fails.
Spectrum superoperator_eigenvalues(const HermitianMatrix& superop);

// The real symmetric representation described above; exposed for tests.
// Throws DimensionError when dim is not a perfect square.
RealMatrix hermitian_basis_representation(const HermitianMatrix& superop);

}  // namespace linalg

// y = coeff * (left ⊗ right) x for each term, plus optional shifts.
struct KroneckerTerm {
  double coeff = 1.0;
  ComplexMatrix left;
  ComplexMatrix right;
};

// Structured shift acting on vec(X) without materializing n²×n² storage:
//   X ↦ identity·X + trace·tr(X)·Id + flip·(X^T − diag(X)).
// Covers Id, nψψ* and F − diag(F) with ψ the maximally entangled vector.
struct StructuredShift {
  double identity = 0.0;
  double trace = 0.0;
  double flip = 0.0;
};

class MatFreeOperator {
 public:
  explicit MatFreeOperator(Index n) : n_(n) {}

  Index n() const { return n_; }
  Index dim() const { return n_ * n_; }

  void add_term(double coeff, ComplexMatrix left, ComplexMatrix right);
  void set_dense_shift(HermitianMatrix shift);
  void set_structured_shift(StructuredShift shift) { structured_ = shift; }

  const std::vector<KroneckerTerm>& terms() const { return terms_; }
  const std::optional<HermitianMatrix>& dense_shift() const { return dense_shift_; }
  const std::optional<StructuredShift>& structured_shift() const { return structured_; }

  // Dense equivalent; subject to the dense-dimension guard.
  ComplexMatrix to_dense() const;

 private:
  Index n_;
  std::vector<KroneckerTerm> terms_;
  std::optional<HermitianMatrix> dense_shift_;
  std::optional<StructuredShift> structured_;
};

struct TraceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t probes = 0;
};

class Seed;

namespace linalg {

// Per term (A ⊗ B) vec(X) = vec(A X B^T); throws DimensionError unless v has n² entries.
ComplexVector matfree_apply(const MatFreeOperator& op, const ComplexVector& v);

// Hutchinson estimate of (1/n²) tr(op^p) from ±1 sign probes.
TraceEstimate hutchinson_normalized_trace_power(const MatFreeOperator& op, int power,
                                                std::size_t probes, const Seed& seed);

// Same estimator for several powers at once, sharing probes: result[k] is the
// estimate for power k+1.
std::vector<TraceEstimate> hutchinson_normalized_trace_powers(const MatFreeOperator& op,
                                                              int max_power, std::size_t probes,
                                                              const Seed& seed);

}  // namespace linalg
}  // namespace spectra
