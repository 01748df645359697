#pragma once

// Exact limiting moments from noncrossing-partition combinatorics, plus the
// semicircle and Kesten–McKay densities.

#include <cstdint>
#include <string>
#include <vector>

namespace spectra {

// Partition of {0, …, p−1}. Blocks are sorted internally and ordered by
// their minimum element.
class SetPartition {
 public:
  SetPartition() = default;
  // Throws std::invalid_argument unless the blocks partition {0..p−1}.
  SetPartition(int p, std::vector<std::vector<int>> blocks);
  // From a restricted growth string: labels[i] is the block of element i.
  static SetPartition from_labels(const std::vector<int>& labels);

  int size() const { return p_; }
  std::size_t block_count() const { return blocks_.size(); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  // labels()[i] = index of the block containing i.
  std::vector<int> labels() const;

  // 1-based rendering such as "{1,3}{2}".
  std::string to_string() const;

  friend bool operator==(const SetPartition&, const SetPartition&) = default;

 private:
  int p_ = 0;
  std::vector<std::vector<int>> blocks_;
};

enum class LawName { Rademacher, Semicircle, CenteredMP, FromMoments };

// Moments m_1..m_P of a marginal law (moments[k] = m_{k+1}).
struct MarginalLaw {
  LawName name = LawName::FromMoments;
  std::vector<double> moments;

  static MarginalLaw rademacher(int max_order);
  static MarginalLaw semicircle(int max_order);
  // XX* − 1 with XX* Marchenko–Pastur of ratio 1.
  static MarginalLaw centered_mp(int max_order);
  static MarginalLaw from_moments(std::vector<double> moments);
  // Stock law by name (Rademacher, Semicircle, CenteredMP).
  static MarginalLaw stock(LawName name, int max_order);

  int max_order() const { return static_cast<int>(moments.size()); }
  double moment(int order) const;  // m_0 = 1
  bool is_centered(double tol = 1e-12) const;
  bool is_normalized(double tol = 1e-12) const;
};

std::string to_string(LawName name);
LawName law_name_from_string(const std::string& name);

struct CumulantSequence {
  std::vector<double> kappas;  // kappas[k] = κ_{k+1}
  double kappa(int order) const { return kappas.at(static_cast<std::size_t>(order - 1)); }
};

enum class DensityKind { Semicircle, KestenMcKay, DilatedKestenMcKay };

struct DensitySpec {
  DensityKind kind = DensityKind::Semicircle;
  double d = 0.0;  // Kesten–McKay parameter

  static DensitySpec semicircle() { return {DensityKind::Semicircle, 0.0}; }
  static DensitySpec kesten_mckay(double d) { return {DensityKind::KestenMcKay, d}; }
  static DensitySpec dilated_kesten_mckay(double d) { return {DensityKind::DilatedKestenMcKay, d}; }

  // Symmetric support [−edge, edge].
  double support_edge() const;
  double density(double x) const;
  double cdf(double x) const;
  std::string describe() const;
};

namespace free {

inline constexpr int kMaxPartitionOrder = 12;
inline constexpr int kMaxPairingOrder = 16;
inline constexpr int kMaxMomentOrder = 10;

// All Bell(p) partitions in restricted-growth-string order
// (p = 3: {123}, {12|3}, {13|2}, {1|23}, {1|2|3}). Guard 1 ≤ p ≤ 12.
std::vector<SetPartition> enumerate_partitions(int p);

// All (p−1)!! pair partitions; empty for odd p. Guard p ≤ 16.
std::vector<SetPartition> enumerate_pair_partitions(int p);

// Noncrossing partitions of [p] (Catalan(p) of them), guard p ≤ 12.
std::vector<SetPartition> enumerate_noncrossing_partitions(int p);

// No a < b < c < d with a, c in one block and b, d in another.
bool is_noncrossing(const SetPartition& pi);

std::uint64_t catalan(int k);
// |NC₂(p)|: Catalan(p/2) for even p, 0 for odd p.
std::uint64_t nc2_count(int p);
std::uint64_t bell(int p);

// Solves m_p = Σ_{π ∈ NC(p)} Π_V κ_{|V|} for κ up to the law's max order.
CumulantSequence moments_to_free_cumulants(const MarginalLaw& law);
std::vector<double> free_cumulants_to_moments(const CumulantSequence& cumulants);

// τ(a_{c_0} ⋯ a_{c_{p−1}}) for free a_c with the given laws: the sum over
// noncrossing partitions with monochromatic blocks of Π_V κ^{(c(V))}_{|V|}.
// colors index into `laws`.
double free_word_moment(const std::vector<int>& colors, const std::vector<MarginalLaw>& laws);
// Same with precomputed cumulants (one sequence per color).
double free_word_moment_from_cumulants(const std::vector<int>& colors,
                                       const std::vector<CumulantSequence>& cumulants);

// d (d−1) ⋯ (d − |π| + 1), the number of i ∈ [d]^p with kernel π.
std::uint64_t partition_class_count(const SetPartition& pi, std::uint64_t d);
std::uint64_t falling_factorial(std::uint64_t d, std::uint64_t k);

// ∫ x^p d(μ₁ ⊛ ⋯ ⊛ μ_d) = Σ_{i ∈ [d]^p} τ²(a_{i_1} ⋯ a_{i_p}), grouped by
// kernel partition; dilated multiplies by d^{−p/2}. `laws` holds either d
// laws or a single law used for all d (i.i.d.). Guard p ≤ 10.
double tensor_convolution_moment(int p, int d, const std::vector<MarginalLaw>& laws, bool dilated);

struct Regime {
  enum class Kind { FixedD, GrowingD } kind = Kind::GrowingD;
  int d = 0;
  std::vector<MarginalLaw> laws;

  static Regime fixed(int d, std::vector<MarginalLaw> laws);
  static Regime growing(std::vector<MarginalLaw> laws = {});
  std::string name() const;
};

// FixedD: dilated tensor-convolution moments p = 1..p_max. GrowingD:
// 0 at odd orders, Catalan(p/2) at even orders; heterogeneous, uncentered or
// unnormalized laws are refused (std::invalid_argument).
std::vector<double> predict_limit_moments(const Regime& regime, int p_max);

// Densities and CDFs.
double semicircle_density(double x);
double semicircle_cdf(double x);
// Throws std::invalid_argument for d < 2.
double km_density(double d, double x);
double km_cdf(double d, double x);
double km_dilated_density(double d, double x);
double km_dilated_cdf(double d, double x);

// ∫ x^p f(x) dx and ∫ f for a density, via the edge substitution and
// adaptive Gauss–Kronrod quadrature.
double density_moment(const DensitySpec& spec, int p);

// f(x) dx = w(θ) dθ under x = edge·sinθ; w is smooth on [−π/2, π/2].
double density_edge_weight(const DensitySpec& spec, double theta);

}  // namespace free
}  // namespace spectra
