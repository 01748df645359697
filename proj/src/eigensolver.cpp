#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "spectra/errors.hpp"
#include "spectra/linalg.hpp"

extern "C" void openblas_set_num_threads(int num_threads);

namespace spectra::linalg {

void set_blas_threads(int threads) { openblas_set_num_threads(std::max(1, threads)); }

namespace {

// Σλ against the trace (absolute 1e-8·dim) and Σλ² against ‖h‖_F² (relative 1e-8).
void check_residuals(const std::vector<double>& values, double trace, double frobenius_sq,
                     const char* who) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
  }
  const double dim = static_cast<double>(values.size());
  const double trace_err = std::abs(sum - trace);
  const double square_err = std::abs(sum_sq - frobenius_sq);
  if (trace_err > 1e-8 * dim * std::max(1.0, std::abs(trace) / dim) ||
      square_err > 1e-8 * std::max(1.0, frobenius_sq)) {
    std::ostringstream msg;
    msg << who << ": residual check failed (dim " << values.size() << ", |Σλ − tr| = " << trace_err
        << ", |Σλ² − tr h²| = " << square_err << ")";
    throw NumericalError(msg.str());
  }
}

std::vector<double> symmetric_eigenvalues_in_place(std::vector<double>& a, lapack_int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  if (n == 1) {
    w[0] = a[0];
    return w;
  }
  // Full symmetric storage, so column-major with 'U' reads the same data.
  const lapack_int info = LAPACKE_dsyev_2stage(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n, w.data());
  if (info != 0) {
    throw NumericalError("dsyev_2stage failed to converge (info = " + std::to_string(info) +
                         ", dim = " + std::to_string(n) + ")");
  }
  return w;
}

}  // namespace

Spectrum hermitian_eigenvalues(const HermitianMatrix& h) {
  const Index n = h.dim();
  const ComplexMatrix& m = h.matrix();
  double frobenius_sq = m.squaredNorm();
  const double trace = m.trace().real();

  std::vector<double> w(static_cast<std::size_t>(n));
  if (n == 1) {
    w[0] = m(0, 0).real();
  } else {
    // Row-major H is column-major H^T = conj(H), which has the same spectrum.
    std::vector<Complex> work(m.data(), m.data() + m.size());
    const lapack_int info = LAPACKE_zheev_2stage(LAPACK_COL_MAJOR, 'N', 'U', static_cast<lapack_int>(n),
                                                 reinterpret_cast<lapack_complex_double*>(work.data()),
                                                 static_cast<lapack_int>(n), w.data());
    if (info != 0) {
      throw NumericalError("zheev_2stage failed to converge (info = " + std::to_string(info) +
                           ", dim = " + std::to_string(n) + ")");
    }
  }
  std::sort(w.begin(), w.end());
  check_residuals(w, trace, frobenius_sq, "hermitian_eigenvalues");
  return Spectrum{std::move(w)};
}

RealMatrix hermitian_basis_representation(const HermitianMatrix& superop) {
  const Index dim = superop.dim();
  const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(dim))));
  if (n * n != dim) {
    throw DimensionError("hermitian_basis_representation: dimension " + std::to_string(dim) +
                         " is not a perfect square");
  }
  const ComplexMatrix& s = superop.matrix();

  // Basis element b has at most two nonzero vec entries (index, coefficient).
  struct Element {
    Index p0, p1;
    Complex c0, c1;
  };
  std::vector<Element> basis;
  basis.reserve(static_cast<std::size_t>(dim));
  const double r = 1.0 / std::sqrt(2.0);
  for (Index k = 0; k < n; ++k) basis.push_back({k * n + k, -1, 1.0, 0.0});
  for (Index k = 0; k < n; ++k) {
    for (Index l = k + 1; l < n; ++l) {
      basis.push_back({k * n + l, l * n + k, r, r});
      basis.push_back({k * n + l, l * n + k, Complex(0.0, r), Complex(0.0, -r)});
    }
  }

  RealMatrix out(dim, dim);
  ComplexVector row(dim);
  const double scale = std::max(1.0, max_abs_entry(s));
  double imag_defect = 0.0;
  for (Index a = 0; a < dim; ++a) {
    const Element& ea = basis[static_cast<std::size_t>(a)];
    row = std::conj(ea.c0) * s.row(ea.p0).transpose();
    if (ea.p1 >= 0) row += std::conj(ea.c1) * s.row(ea.p1).transpose();
    for (Index b = a; b < dim; ++b) {
      const Element& eb = basis[static_cast<std::size_t>(b)];
      Complex v = row[eb.p0] * eb.c0;
      if (eb.p1 >= 0) v += row[eb.p1] * eb.c1;
      imag_defect = std::max(imag_defect, std::abs(v.imag()));
      out(a, b) = v.real();
      out(b, a) = v.real();
    }
  }
  if (imag_defect > kHermitianTolerance * scale) {
    throw NotHermitianError("hermitian_basis_representation: operator does not preserve Hermiticity "
                            "(imaginary defect " + std::to_string(imag_defect) + ")");
  }
  return out;
}

Spectrum superoperator_eigenvalues(const HermitianMatrix& superop) {
  RealMatrix real_form;
  try {
    real_form = hermitian_basis_representation(superop);
  } catch (const NotHermitianError&) {
    return hermitian_eigenvalues(superop);
  } catch (const DimensionError&) {
    return hermitian_eigenvalues(superop);
  }
  const double trace = real_form.trace();
  const double frobenius_sq = real_form.squaredNorm();
  const auto n = static_cast<lapack_int>(real_form.rows());
  std::vector<double> a(real_form.data(), real_form.data() + real_form.size());
  real_form.resize(0, 0);
  std::vector<double> w = symmetric_eigenvalues_in_place(a, n);
  std::sort(w.begin(), w.end());
  check_residuals(w, trace, frobenius_sq, "superoperator_eigenvalues");
  return Spectrum{std::move(w)};
}

}  // namespace spectra::linalg
