#include <cmath>
#include <string>

#include "spectra/errors.hpp"
#include "spectra/linalg.hpp"
#include "spectra/rng.hpp"

namespace spectra {

void MatFreeOperator::add_term(double coeff, ComplexMatrix left, ComplexMatrix right) {
  if (left.rows() != n_ || left.cols() != n_ || right.rows() != n_ || right.cols() != n_) {
    throw DimensionError("MatFreeOperator: term factors must be " + std::to_string(n_) + "x" +
                         std::to_string(n_));
  }
  terms_.push_back({coeff, std::move(left), std::move(right)});
}

void MatFreeOperator::set_dense_shift(HermitianMatrix shift) {
  if (shift.dim() != dim()) {
    throw DimensionError("MatFreeOperator: dense shift must have dimension n^2 = " +
                         std::to_string(dim()));
  }
  dense_shift_ = std::move(shift);
}

ComplexMatrix MatFreeOperator::to_dense() const {
  const Index big = dim();
  if (static_cast<std::size_t>(big) > linalg::max_dense_dim()) {
    throw ResourceGuardError("MatFreeOperator::to_dense: dimension " + std::to_string(big) +
                             " exceeds dense cap " + std::to_string(linalg::max_dense_dim()));
  }
  ComplexMatrix out = ComplexMatrix::Zero(big, big);
  for (const auto& term : terms_) out += term.coeff * linalg::kron(term.left, term.right);
  if (dense_shift_) out += dense_shift_->matrix();
  if (structured_) {
    const auto& s = *structured_;
    for (Index k = 0; k < big; ++k) out(k, k) += s.identity;
    for (Index k = 0; k < n_; ++k) {
      for (Index l = 0; l < n_; ++l) {
        out(k * n_ + k, l * n_ + l) += s.trace;
        if (k != l) out(k * n_ + l, l * n_ + k) += s.flip;
      }
    }
  }
  return out;
}

namespace linalg {

ComplexVector matfree_apply(const MatFreeOperator& op, const ComplexVector& v) {
  const Index n = op.n();
  if (v.size() != n * n) {
    throw DimensionError("matfree_apply: vector length " + std::to_string(v.size()) +
                         " does not match n^2 = " + std::to_string(n * n));
  }
  const Eigen::Map<const ComplexMatrix> x(v.data(), n, n);
  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  ComplexMatrix tmp(n, n);
  for (const auto& term : op.terms()) {
    tmp.noalias() = term.left * x;
    y.noalias() += term.coeff * (tmp * term.right.transpose());
  }
  if (const auto& s = op.structured_shift()) {
    if (s->identity != 0.0) y += s->identity * x;
    if (s->trace != 0.0) y.diagonal().array() += s->trace * x.trace();
    if (s->flip != 0.0) {
      y += s->flip * x.transpose();
      y.diagonal() -= s->flip * x.diagonal();
    }
  }
  ComplexVector out = Eigen::Map<const ComplexVector>(y.data(), y.size());
  if (const auto& shift = op.dense_shift()) out.noalias() += shift->matrix() * v;
  return out;
}

std::vector<TraceEstimate> hutchinson_normalized_trace_powers(const MatFreeOperator& op,
                                                              int max_power, std::size_t probes,
                                                              const Seed& seed) {
  if (max_power < 1) throw std::invalid_argument("hutchinson: power must be >= 1");
  if (probes < 1) throw std::invalid_argument("hutchinson: probes must be >= 1");
  const Index dim = op.dim();
  const auto powers = static_cast<std::size_t>(max_power);
  std::vector<double> sum(powers, 0.0);
  std::vector<double> sum_sq(powers, 0.0);

  rng::CounterRng gen(seed);
  ComplexVector z(dim);
  ComplexVector w(dim);
  for (std::size_t probe = 0; probe < probes; ++probe) {
    std::uint64_t bits = 0;
    for (Index i = 0; i < dim; ++i) {
      if (i % 64 == 0) bits = gen();
      z[i] = (bits & 1U) != 0 ? 1.0 : -1.0;
      bits >>= 1U;
    }
    w = z;
    for (std::size_t p = 0; p < powers; ++p) {
      w = matfree_apply(op, w);
      // z is real, so z* w = Σ z_i w_i.
      const double value = (z.real().dot(w.real())) / static_cast<double>(dim);
      sum[p] += value;
      sum_sq[p] += value * value;
    }
  }

  std::vector<TraceEstimate> out(powers);
  const auto count = static_cast<double>(probes);
  for (std::size_t p = 0; p < powers; ++p) {
    const double mean = sum[p] / count;
    double std_error = 0.0;
    if (probes > 1) {
      const double variance = std::max(0.0, (sum_sq[p] - count * mean * mean) / (count - 1.0));
      std_error = std::sqrt(variance / count);
    }
    out[p] = {mean, std_error, probes};
  }
  return out;
}

TraceEstimate hutchinson_normalized_trace_power(const MatFreeOperator& op, int power,
                                                std::size_t probes, const Seed& seed) {
  return hutchinson_normalized_trace_powers(op, power, probes, seed).back();
}

}  // namespace linalg
}  // namespace spectra
