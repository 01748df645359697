#include "spectra/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "spectra/errors.hpp"

namespace spectra {
namespace linalg {

std::size_t max_dense_dim() {
  if (const char* env = std::getenv("SPECTRA_MAX_DENSE_DIM"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long value = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<std::size_t>(value);
  }
  return kDefaultMaxDenseDim;
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  double defect = 0.0;
  const Index n = m.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      defect = std::max(defect, std::abs(m(i, j) - std::conj(m(j, i))));
    }
  }
  return defect;
}

double max_abs_entry(const ComplexMatrix& m) {
  double best = 0.0;
  const Complex* data = m.data();
  for (Index k = 0; k < m.size(); ++k) best = std::max(best, std::abs(data[k]));
  return best;
}

bool all_finite(const ComplexMatrix& m) {
  const Complex* data = m.data();
  for (Index k = 0; k < m.size(); ++k) {
    if (!std::isfinite(data[k].real()) || !std::isfinite(data[k].imag())) return false;
  }
  return true;
}

}  // namespace linalg

HermitianMatrix::HermitianMatrix(ComplexMatrix base) : base_(std::move(base)) {
  if (base_.rows() == 0 || base_.rows() != base_.cols()) {
    throw DimensionError("HermitianMatrix: expected a nonempty square matrix, got " +
                         std::to_string(base_.rows()) + "x" + std::to_string(base_.cols()));
  }
  if (!linalg::all_finite(base_)) throw NotHermitianError("HermitianMatrix: non-finite entry");
  const double scale = std::max(1.0, linalg::max_abs_entry(base_));
  const double defect = linalg::hermiticity_defect(base_);
  if (defect > linalg::kHermitianTolerance * scale) {
    throw NotHermitianError("HermitianMatrix: hermiticity defect " + std::to_string(defect) +
                            " exceeds tolerance");
  }
}

HermitianMatrix HermitianMatrix::identity(Index dim) {
  return HermitianMatrix(ComplexMatrix::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::zero(Index dim) {
  return HermitianMatrix(ComplexMatrix::Zero(dim, dim));
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> values) {
  const auto n = static_cast<Index>(values.size());
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = values[static_cast<std::size_t>(i)];
  return HermitianMatrix(std::move(m));
}

namespace linalg {

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Index rows = a.rows() * b.rows();
  const Index cols = a.cols() * b.cols();
  const auto cap = static_cast<Index>(max_dense_dim());
  if (rows > cap || cols > cap) {
    throw ResourceGuardError("kron: result " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " exceeds dense cap " + std::to_string(cap) +
                             " (set SPECTRA_MAX_DENSE_DIM or use the matrix-free path)");
  }
  ComplexMatrix out(rows, cols);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix entrywise_conj(const ComplexMatrix& a) { return a.conjugate(); }

Complex normalized_trace(const ComplexMatrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionError("normalized_trace: matrix must be square and nonempty");
  }
  return a.trace() / static_cast<double>(a.rows());
}

ComplexVector vec(const ComplexMatrix& x) {
  // Row-major storage is already vec order.
  return Eigen::Map<const ComplexVector>(x.data(), x.size());
}

ComplexMatrix unvec(const ComplexVector& v, Index n) {
  if (v.size() != n * n) {
    throw DimensionError("unvec: vector of length " + std::to_string(v.size()) +
                         " is not n^2 for n = " + std::to_string(n));
  }
  return Eigen::Map<const ComplexMatrix>(v.data(), n, n);
}

}  // namespace linalg
}  // namespace spectra
