#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spectra/free_moments.hpp"
#include "spectra/linalg.hpp"
#include "spectra/rng.hpp"

namespace spectra {

// Empirical spectral distribution: sorted eigenvalues with provenance.
struct ESD {
  std::vector<double> eigenvalues;
  std::size_t source_dim = 0;
  Seed trial_seed;

  std::size_t size() const { return eigenvalues.size(); }
};

struct MomentReport {
  std::string regime;
  std::vector<int> orders;
  std::vector<double> empirical;
  std::vector<double> empirical_std_error;
  std::vector<double> predicted;
};

struct KSReport {
  double statistic = 0.0;
  DensitySpec target;
  std::size_t sample_size = 0;
};

struct OrderVerdict {
  int order = 0;
  bool pass = false;
  double deviation = 0.0;  // |empirical − predicted|
  double allowance = 0.0;  // tolerance + 3·stdErr
};

struct TrialAggregate {
  ESD pooled;
  std::vector<double> mean_moments;      // per order 1..p_max
  std::vector<double> moment_variance;   // across-trial sample variance
  std::vector<double> moment_std_error;  // sqrt(variance / trials)
};

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
  double density = 0.0;
};

namespace stats {

ESD esd_from_spectrum(const Spectrum& s, const Seed& seed);

// Entry k is the mean of λ^{k+1}.
std::vector<double> empirical_moments(const ESD& e, int p_max);

// sup_x |F_emp(x) − F(x)| with F_emp evaluated at both one-sided limits of
// every jump.
KSReport ks_distance(const ESD& e, const DensitySpec& target);

// Requires ≥ 2 trials (DimensionError otherwise).
TrialAggregate aggregate_trials(const std::vector<ESD>& esds, int p_max);

// Same moment statistics from per-trial moment rows (e.g. matrix-free estimates).
TrialAggregate aggregate_moment_rows(const std::vector<std::vector<double>>& rows);

// Order p passes iff |empirical − predicted| ≤ tolerance_p + 3·stdErr_p.
std::vector<OrderVerdict> compare_report(const MomentReport& m, const std::vector<double>& tolerances);

// `bins` equal-width bins over [lo, hi]; density = count / (total · width).
std::vector<HistogramBin> histogram(const ESD& e, std::size_t bins, double lo, double hi);
std::vector<HistogramBin> histogram(const ESD& e, std::size_t bins);

}  // namespace stats
}  // namespace spectra
