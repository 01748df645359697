#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "spectra/free_moments.hpp"

namespace spectra {
namespace {

constexpr double kPi = std::numbers::pi;

void check_km(double d) {
  if (!(d >= 2.0) || !std::isfinite(d)) {
    throw std::invalid_argument("Kesten-McKay parameter must satisfy d >= 2 (got " + std::to_string(d) + ")");
  }
}

// Under x = e·sinθ every law here has f(x) dx = w(θ) dθ with
//   w(θ) = (1/2π) · d · e² cos²θ / (A + e² cos²θ),
// smooth on [−π/2, π/2]. The semicircle is the d → ∞ limit, w = (2/π) cos²θ.
struct EdgeForm {
  double edge;
  double d;
  double a;
  bool semicircle;

  double weight(double theta) const {
    const double c = std::cos(theta);
    if (semicircle) return (2.0 / kPi) * c * c;
    const double ec2 = edge * edge * c * c;
    const double den = a + ec2;
    if (den == 0.0) return d / (2.0 * kPi);
    return d * ec2 / (2.0 * kPi * den);
  }
};

EdgeForm edge_form(const DensitySpec& spec) {
  switch (spec.kind) {
    case DensityKind::Semicircle: return {2.0, 0.0, 0.0, true};
    case DensityKind::KestenMcKay:
      check_km(spec.d);
      return {2.0 * std::sqrt(spec.d - 1.0), spec.d, (spec.d - 2.0) * (spec.d - 2.0), false};
    case DensityKind::DilatedKestenMcKay:
      check_km(spec.d);
      return {2.0 * std::sqrt(1.0 - 1.0 / spec.d), spec.d, (spec.d - 2.0) * (spec.d - 2.0) / spec.d, false};
  }
  throw std::invalid_argument("unknown density kind");
}

template <class F>
double integrate(F f, double lo, double hi) {
  if (hi <= lo) return 0.0;
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13, &error);
}

double edge_cdf(const EdgeForm& form, double x) {
  if (x <= -form.edge) return 0.0;
  if (x >= form.edge) return 1.0;
  const double theta = std::asin(x / form.edge);
  const double v = integrate([&](double t) { return form.weight(t); }, -kPi / 2.0, theta);
  return std::min(1.0, std::max(0.0, v));
}

}  // namespace

double DensitySpec::support_edge() const { return edge_form(*this).edge; }

double DensitySpec::density(double x) const {
  switch (kind) {
    case DensityKind::Semicircle: return free::semicircle_density(x);
    case DensityKind::KestenMcKay: return free::km_density(d, x);
    case DensityKind::DilatedKestenMcKay: return free::km_dilated_density(d, x);
  }
  return 0.0;
}

double DensitySpec::cdf(double x) const {
  if (kind == DensityKind::Semicircle) return free::semicircle_cdf(x);
  return edge_cdf(edge_form(*this), x);
}

std::string DensitySpec::describe() const {
  std::string dd = std::to_string(d);
  if (d == std::floor(d) && std::abs(d) < 1e15) dd = std::to_string(static_cast<long long>(d));
  switch (kind) {
    case DensityKind::Semicircle: return "Semicircle";
    case DensityKind::KestenMcKay: return "KestenMcKay(" + dd + ")";
    case DensityKind::DilatedKestenMcKay: return "DilatedKestenMcKay(" + dd + ")";
  }
  return "unknown";
}

namespace free {

double semicircle_density(double x) {
  if (std::abs(x) >= 2.0) return 0.0;
  return std::sqrt(4.0 - x * x) / (2.0 * kPi);
}

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * kPi) + std::asin(x / 2.0) / kPi;
}

double km_density(double d, double x) {
  check_km(d);
  const double r = 4.0 * (d - 1.0) - x * x;
  if (r <= 0.0) return 0.0;
  return d * std::sqrt(r) / (2.0 * kPi * (d * d - x * x));
}

double km_cdf(double d, double x) { return edge_cdf(edge_form(DensitySpec::kesten_mckay(d)), x); }

double km_dilated_density(double d, double x) {
  check_km(d);
  const double r = 4.0 * (1.0 - 1.0 / d) - x * x;
  if (r <= 0.0) return 0.0;
  return d * std::sqrt(r) / (2.0 * kPi * (d - x * x));
}

double km_dilated_cdf(double d, double x) { return edge_cdf(edge_form(DensitySpec::dilated_kesten_mckay(d)), x); }

double density_edge_weight(const DensitySpec& spec, double theta) { return edge_form(spec).weight(theta); }

double density_moment(const DensitySpec& spec, int p) {
  if (p < 0) throw std::invalid_argument("density_moment: negative order");
  const EdgeForm form = edge_form(spec);
  return integrate([&](double t) { return form.weight(t) * std::pow(form.edge * std::sin(t), p); }, -kPi / 2.0,
                   kPi / 2.0);
}

}  // namespace free
}  // namespace spectra
