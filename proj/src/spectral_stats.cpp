#include "spectra/spectral_stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spectra/errors.hpp"

namespace spectra::stats {

ESD esd_from_spectrum(const Spectrum& s, const Seed& seed) {
  ESD e{s.values, s.values.size(), seed};
  if (!std::is_sorted(e.eigenvalues.begin(), e.eigenvalues.end())) std::sort(e.eigenvalues.begin(), e.eigenvalues.end());
  return e;
}

std::vector<double> empirical_moments(const ESD& e, int p_max) {
  if (p_max < 1) throw DimensionError("empirical_moments: p_max must be >= 1");
  std::vector<double> sums(static_cast<std::size_t>(p_max), 0.0);
  for (double x : e.eigenvalues) {
    double power = 1.0;
    for (auto& s : sums) {
      power *= x;
      s += power;
    }
  }
  if (e.eigenvalues.empty()) return sums;
  const auto count = static_cast<double>(e.eigenvalues.size());
  for (auto& s : sums) s /= count;
  return sums;
}

KSReport ks_distance(const ESD& e, const DensitySpec& target) {
  KSReport report{0.0, target, e.size()};
  if (e.eigenvalues.empty()) return report;
  const auto count = static_cast<double>(e.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double f = target.cdf(e.eigenvalues[i]);
    stat = std::max({stat, static_cast<double>(i + 1) / count - f, f - static_cast<double>(i) / count});
  }
  report.statistic = std::clamp(stat, 0.0, 1.0);
  return report;
}

TrialAggregate aggregate_moment_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DimensionError("aggregate_moment_rows: no trials");
  const std::size_t orders = rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != orders) throw DimensionError("aggregate_moment_rows: rows differ in length");
  }
  const auto trials = static_cast<double>(rows.size());
  TrialAggregate agg;
  agg.mean_moments.assign(orders, 0.0);
  agg.moment_variance.assign(orders, 0.0);
  agg.moment_std_error.assign(orders, 0.0);
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < orders; ++k) agg.mean_moments[k] += row[k];
  }
  for (auto& m : agg.mean_moments) m /= trials;
  if (rows.size() > 1) {
    for (std::size_t k = 0; k < orders; ++k) {
      double ss = 0.0;
      for (const auto& row : rows) ss += (row[k] - agg.mean_moments[k]) * (row[k] - agg.mean_moments[k]);
      agg.moment_variance[k] = ss / (trials - 1.0);
      agg.moment_std_error[k] = std::sqrt(agg.moment_variance[k] / trials);
    }
  }
  return agg;
}

TrialAggregate aggregate_trials(const std::vector<ESD>& esds, int p_max) {
  if (esds.size() < 2) throw DimensionError("aggregate_trials: need at least 2 trials, got " + std::to_string(esds.size()));
  std::vector<std::vector<double>> rows;
  rows.reserve(esds.size());
  std::size_t total = 0;
  for (const auto& e : esds) {
    rows.push_back(empirical_moments(e, p_max));
    total += e.size();
  }
  TrialAggregate agg = aggregate_moment_rows(rows);
  agg.pooled.eigenvalues.reserve(total);
  for (const auto& e : esds) agg.pooled.eigenvalues.insert(agg.pooled.eigenvalues.end(), e.eigenvalues.begin(), e.eigenvalues.end());
  std::sort(agg.pooled.eigenvalues.begin(), agg.pooled.eigenvalues.end());
  agg.pooled.source_dim = total;
  agg.pooled.trial_seed = esds.front().trial_seed;
  // Pooled moments weight trials by their point counts.
  agg.mean_moments = empirical_moments(agg.pooled, p_max);
  return agg;
}

std::vector<OrderVerdict> compare_report(const MomentReport& m, const std::vector<double>& tolerances) {
  const std::size_t k = m.orders.size();
  if (m.empirical.size() != k || m.predicted.size() != k || m.empirical_std_error.size() != k || tolerances.size() != k) {
    throw DimensionError("compare_report: orders, empirical, stdErr, predicted and tolerances must have equal lengths");
  }
  std::vector<OrderVerdict> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    OrderVerdict v;
    v.order = m.orders[i];
    v.deviation = std::abs(m.empirical[i] - m.predicted[i]);
    v.allowance = tolerances[i] + 3.0 * m.empirical_std_error[i];
    v.pass = v.deviation <= v.allowance;
    out.push_back(v);
  }
  return out;
}

std::vector<HistogramBin> histogram(const ESD& e, std::size_t bins, double lo, double hi) {
  if (bins < 1) throw DimensionError("histogram: need at least one bin");
  if (!(hi > lo)) throw DimensionError("histogram: empty range");
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].left = lo + width * static_cast<double>(b);
    out[b].right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double x : e.eigenvalues) {
    if (x < lo || x > hi) continue;
    auto b = static_cast<std::size_t>((x - lo) / width);
    if (b >= bins) b = bins - 1;
    ++out[b].count;
  }
  const auto total = static_cast<double>(e.size());
  if (total > 0) {
    for (auto& bin : out) bin.density = static_cast<double>(bin.count) / (total * width);
  }
  return out;
}

std::vector<HistogramBin> histogram(const ESD& e, std::size_t bins) {
  if (e.eigenvalues.empty()) return histogram(e, bins, -1.0, 1.0);
  double lo = e.eigenvalues.front();
  double hi = e.eigenvalues.back();
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return histogram(e, bins, lo, hi);
}

}  // namespace spectra::stats
