#include "spectra/free_moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace spectra {

SetPartition::SetPartition(int p, std::vector<std::vector<int>> blocks) : p_(p), blocks_(std::move(blocks)) {
  if (p < 0) throw std::invalid_argument("SetPartition: negative ground-set size");
  std::vector<int> seen(static_cast<std::size_t>(p), 0);
  for (auto& block : blocks_) {
    if (block.empty()) throw std::invalid_argument("SetPartition: empty block");
    std::sort(block.begin(), block.end());
    for (int x : block) {
      if (x < 0 || x >= p) throw std::invalid_argument("SetPartition: element out of range");
      if (seen[static_cast<std::size_t>(x)]++ != 0) throw std::invalid_argument("SetPartition: blocks overlap");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::invalid_argument("SetPartition: blocks do not cover the ground set");
  }
  std::sort(blocks_.begin(), blocks_.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

SetPartition SetPartition::from_labels(const std::vector<int>& labels) {
  std::map<int, std::vector<int>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(static_cast<int>(i));
  std::vector<std::vector<int>> blocks;
  blocks.reserve(by_label.size());
  for (auto& [label, block] : by_label) blocks.push_back(std::move(block));
  return SetPartition(static_cast<int>(labels.size()), std::move(blocks));
}

std::vector<int> SetPartition::labels() const {
  std::vector<int> out(static_cast<std::size_t>(p_), 0);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    for (int x : blocks_[b]) out[static_cast<std::size_t>(x)] = static_cast<int>(b);
  }
  return out;
}

std::string SetPartition::to_string() const {
  std::ostringstream out;
  for (const auto& block : blocks_) {
    out << '{';
    for (std::size_t k = 0; k < block.size(); ++k) out << (k ? "," : "") << block[k] + 1;
    out << '}';
  }
  return out.str();
}

std::string to_string(LawName name) {
  switch (name) {
    case LawName::Rademacher: return "Rademacher";
    case LawName::Semicircle: return "Semicircle";
    case LawName::CenteredMP: return "CenteredMP";
    case LawName::FromMoments: return "FromMoments";
  }
  return "unknown";
}

LawName law_name_from_string(const std::string& name) {
  for (auto law : {LawName::Rademacher, LawName::Semicircle, LawName::CenteredMP, LawName::FromMoments}) {
    if (name == to_string(law)) return law;
  }
  throw std::invalid_argument("unknown law '" + name + "' (expected Rademacher, Semicircle or CenteredMP)");
}

namespace {

void check_order(int max_order) {
  if (max_order < 2) throw std::invalid_argument("MarginalLaw: need moments up to order >= 2");
}

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

}  // namespace

MarginalLaw MarginalLaw::rademacher(int max_order) {
  check_order(max_order);
  MarginalLaw law{LawName::Rademacher, {}};
  for (int p = 1; p <= max_order; ++p) law.moments.push_back(p % 2 == 0 ? 1.0 : 0.0);
  return law;
}

MarginalLaw MarginalLaw::semicircle(int max_order) {
  check_order(max_order);
  MarginalLaw law{LawName::Semicircle, {}};
  for (int p = 1; p <= max_order; ++p) {
    law.moments.push_back(p % 2 == 0 ? static_cast<double>(free::catalan(p / 2)) : 0.0);
  }
  return law;
}

MarginalLaw MarginalLaw::centered_mp(int max_order) {
  check_order(max_order);
  MarginalLaw law{LawName::CenteredMP, {}};
  // E(x − 1)^p with E x^j = Catalan(j).
  for (int p = 1; p <= max_order; ++p) {
    double m = 0.0;
    for (int j = 0; j <= p; ++j) {
      const double sign = (p - j) % 2 == 0 ? 1.0 : -1.0;
      m += sign * binomial(p, j) * static_cast<double>(free::catalan(j));
    }
    law.moments.push_back(m);
  }
  return law;
}

MarginalLaw MarginalLaw::from_moments(std::vector<double> moments) {
  check_order(static_cast<int>(moments.size()));
  for (double m : moments) {
    if (!std::isfinite(m)) throw std::invalid_argument("MarginalLaw: non-finite moment");
  }
  return {LawName::FromMoments, std::move(moments)};
}

MarginalLaw MarginalLaw::stock(LawName name, int max_order) {
  switch (name) {
    case LawName::Rademacher: return rademacher(max_order);
    case LawName::Semicircle: return semicircle(max_order);
    case LawName::CenteredMP: return centered_mp(max_order);
    case LawName::FromMoments: break;
  }
  throw std::invalid_argument("MarginalLaw::stock: FromMoments needs explicit moments");
}

double MarginalLaw::moment(int order) const {
  if (order == 0) return 1.0;
  if (order < 0 || order > max_order()) {
    throw std::out_of_range("MarginalLaw: moment of order " + std::to_string(order) + " not available (max " +
                            std::to_string(max_order()) + ")");
  }
  return moments[static_cast<std::size_t>(order - 1)];
}

bool MarginalLaw::is_centered(double tol) const { return std::abs(moment(1)) <= tol; }
bool MarginalLaw::is_normalized(double tol) const { return std::abs(moment(2) - 1.0) <= tol; }

namespace free {
namespace {

void guard(int p, int limit, const char* who) {
  if (p < 0 || p > limit) {
    throw std::invalid_argument(std::string(who) + ": order " + std::to_string(p) + " outside the guard [0, " +
                                std::to_string(limit) + "]");
  }
}

void rgs_recurse(std::vector<int>& labels, int pos, int blocks, std::vector<SetPartition>& out) {
  if (pos == static_cast<int>(labels.size())) {
    out.push_back(SetPartition::from_labels(labels));
    return;
  }
  for (int b = 0; b <= blocks; ++b) {
    labels[static_cast<std::size_t>(pos)] = b;
    rgs_recurse(labels, pos + 1, std::max(blocks, b + 1), out);
  }
}

// Element `pos` may join an open block b only once every block opened after b
// is closed for good, which is exactly the noncrossing condition.
void nc_recurse(std::vector<int>& labels, std::vector<int>& open, int pos, int blocks,
                std::vector<SetPartition>& out) {
  if (pos == static_cast<int>(labels.size())) {
    out.push_back(SetPartition::from_labels(labels));
    return;
  }
  for (std::size_t k = 0; k < open.size(); ++k) {
    std::vector<int> saved(open.begin() + static_cast<std::ptrdiff_t>(k) + 1, open.end());
    const int b = open[k];
    open.resize(k + 1);
    labels[static_cast<std::size_t>(pos)] = b;
    nc_recurse(labels, open, pos + 1, blocks, out);
    open.insert(open.end(), saved.begin(), saved.end());
  }
  labels[static_cast<std::size_t>(pos)] = blocks;
  open.push_back(blocks);
  nc_recurse(labels, open, pos + 1, blocks + 1, out);
  open.pop_back();
}

void pair_recurse(std::vector<int>& labels, int next_label, std::vector<SetPartition>& out) {
  const auto first = std::find(labels.begin(), labels.end(), -1);
  if (first == labels.end()) {
    out.push_back(SetPartition::from_labels(labels));
    return;
  }
  *first = next_label;
  for (auto it = first + 1; it != labels.end(); ++it) {
    if (*it != -1) continue;
    *it = next_label;
    pair_recurse(labels, next_label + 1, out);
    *it = -1;
  }
  *first = -1;
}

// coeffs[s][r] = Σ over compositions r = i_1 + … + i_s (i_j ≥ 0) of Π m_{i_j}.
std::vector<std::vector<double>> composition_sums(const std::vector<double>& m, int p) {
  std::vector<std::vector<double>> c(static_cast<std::size_t>(p + 1),
                                     std::vector<double>(static_cast<std::size_t>(p + 1), 0.0));
  c[0][0] = 1.0;
  for (int s = 1; s <= p; ++s) {
    for (int r = 0; r <= p; ++r) {
      double acc = 0.0;
      for (int i = 0; i <= r; ++i) acc += m[static_cast<std::size_t>(i)] * c[s - 1][r - i];
      c[s][r] = acc;
    }
  }
  return c;
}

}  // namespace

std::vector<SetPartition> enumerate_partitions(int p) {
  if (p < 1 || p > kMaxPartitionOrder) {
    throw std::invalid_argument("enumerate_partitions: p = " + std::to_string(p) + " outside [1, " +
                                std::to_string(kMaxPartitionOrder) + "]");
  }
  std::vector<SetPartition> out;
  out.reserve(static_cast<std::size_t>(bell(p)));
  std::vector<int> labels(static_cast<std::size_t>(p), 0);
  rgs_recurse(labels, 1, 1, out);
  return out;
}

std::vector<SetPartition> enumerate_pair_partitions(int p) {
  guard(p, kMaxPairingOrder, "enumerate_pair_partitions");
  std::vector<SetPartition> out;
  if (p % 2 != 0) return out;
  std::vector<int> labels(static_cast<std::size_t>(p), -1);
  pair_recurse(labels, 0, out);
  return out;
}

std::vector<SetPartition> enumerate_noncrossing_partitions(int p) {
  if (p < 1 || p > kMaxPartitionOrder) {
    throw std::invalid_argument("enumerate_noncrossing_partitions: p = " + std::to_string(p) + " outside [1, " +
                                std::to_string(kMaxPartitionOrder) + "]");
  }
  std::vector<SetPartition> out;
  std::vector<int> labels(static_cast<std::size_t>(p), 0);
  std::vector<int> open{0};
  nc_recurse(labels, open, 1, 1, out);
  return out;
}

bool is_noncrossing(const SetPartition& pi) {
  const std::vector<int> lab = pi.labels();
  const int p = pi.size();
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      if (lab[b] == lab[a]) continue;
      for (int c = b + 1; c < p; ++c) {
        if (lab[c] != lab[a]) continue;
        for (int d = c + 1; d < p; ++d) {
          if (lab[d] == lab[b]) return false;
        }
      }
    }
  }
  return true;
}

std::uint64_t catalan(int k) {
  if (k < 0 || k > 33) throw std::invalid_argument("catalan: index out of range");
  std::uint64_t c = 1;
  // C_{j+1} = C_j · 2(2j+1)/(j+2), exact in integers.
  for (int j = 0; j < k; ++j) c = c * 2 * static_cast<std::uint64_t>(2 * j + 1) / static_cast<std::uint64_t>(j + 2);
  return c;
}

std::uint64_t nc2_count(int p) {
  if (p < 0) throw std::invalid_argument("nc2_count: negative order");
  return p % 2 == 0 ? catalan(p / 2) : 0;
}

std::uint64_t bell(int p) {
  if (p < 0 || p > 25) throw std::invalid_argument("bell: order out of range");
  std::vector<std::uint64_t> row{1};
  for (int i = 0; i < p; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

CumulantSequence moments_to_free_cumulants(const MarginalLaw& law) {
  const int p_max = law.max_order();
  std::vector<double> m(static_cast<std::size_t>(p_max + 1));
  for (int k = 0; k <= p_max; ++k) m[static_cast<std::size_t>(k)] = law.moment(k);
  const auto c = composition_sums(m, p_max);
  // m_p = Σ_{s=1}^{p} κ_s · c[s][p − s], by the block containing the first element.
  CumulantSequence out;
  out.kappas.resize(static_cast<std::size_t>(p_max));
  for (int p = 1; p <= p_max; ++p) {
    double rest = 0.0;
    for (int s = 1; s < p; ++s) rest += out.kappas[static_cast<std::size_t>(s - 1)] * c[s][p - s];
    out.kappas[static_cast<std::size_t>(p - 1)] = m[static_cast<std::size_t>(p)] - rest;
  }
  return out;
}

std::vector<double> free_cumulants_to_moments(const CumulantSequence& cumulants) {
  const int p_max = static_cast<int>(cumulants.kappas.size());
  std::vector<double> m(static_cast<std::size_t>(p_max + 1), 0.0);
  m[0] = 1.0;
  for (int p = 1; p <= p_max; ++p) {
    const auto c = composition_sums(m, p);
    double acc = 0.0;
    for (int s = 1; s <= p; ++s) acc += cumulants.kappas[static_cast<std::size_t>(s - 1)] * c[s][p - s];
    m[static_cast<std::size_t>(p)] = acc;
  }
  return {m.begin() + 1, m.end()};
}

double free_word_moment_from_cumulants(const std::vector<int>& colors, const std::vector<CumulantSequence>& cumulants) {
  const int p = static_cast<int>(colors.size());
  if (p == 0) return 1.0;
  for (int c : colors) {
    if (c < 0 || static_cast<std::size_t>(c) >= cumulants.size()) {
      throw std::invalid_argument("free_word_moment: color " + std::to_string(c) + " has no law");
    }
    if (static_cast<int>(cumulants[static_cast<std::size_t>(c)].kappas.size()) < p) {
      throw std::invalid_argument("free_word_moment: cumulants of color " + std::to_string(c) +
                                  " unavailable to order " + std::to_string(p));
    }
  }

  // interval(i, j): NC monochromatic partitions of positions [i, j).
  // block(b, j, s): the open block has s elements, the latest at b; it either
  // closes (κ_s times the interval after b) or takes a same-colored b' > b.
  std::map<std::pair<int, int>, double> interval_memo;
  std::map<std::tuple<int, int, int>, double> block_memo;
  std::function<double(int, int)> interval;
  std::function<double(int, int, int)> block;
  interval = [&](int i, int j) -> double {
    if (i >= j) return 1.0;
    if (auto it = interval_memo.find({i, j}); it != interval_memo.end()) return it->second;
    const double v = block(i, j, 1);
    interval_memo.emplace(std::make_pair(i, j), v);
    return v;
  };
  block = [&](int b, int j, int s) -> double {
    const auto key = std::make_tuple(b, j, s);
    if (auto it = block_memo.find(key); it != block_memo.end()) return it->second;
    const int color = colors[static_cast<std::size_t>(b)];
    double v = cumulants[static_cast<std::size_t>(color)].kappa(s) * interval(b + 1, j);
    for (int next = b + 1; next < j; ++next) {
      if (colors[static_cast<std::size_t>(next)] != color) continue;
      const double gap = interval(b + 1, next);
      if (gap != 0.0) v += gap * block(next, j, s + 1);
    }
    block_memo.emplace(key, v);
    return v;
  };
  return interval(0, p);
}

double free_word_moment(const std::vector<int>& colors, const std::vector<MarginalLaw>& laws) {
  std::vector<CumulantSequence> cumulants;
  cumulants.reserve(laws.size());
  for (const auto& law : laws) cumulants.push_back(moments_to_free_cumulants(law));
  return free_word_moment_from_cumulants(colors, cumulants);
}

std::uint64_t falling_factorial(std::uint64_t d, std::uint64_t k) {
  if (k > d) return 0;
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < k; ++i) out *= d - i;
  return out;
}

std::uint64_t partition_class_count(const SetPartition& pi, std::uint64_t d) {
  return falling_factorial(d, pi.block_count());
}

namespace {

bool same_law(const MarginalLaw& a, const MarginalLaw& b, int p) {
  for (int k = 1; k <= p; ++k) {
    if (a.moment(k) != b.moment(k)) return false;
  }
  return true;
}

}  // namespace

double tensor_convolution_moment(int p, int d, const std::vector<MarginalLaw>& laws, bool dilated) {
  guard(p, kMaxMomentOrder, "tensor_convolution_moment");
  if (d < 1) throw std::invalid_argument("tensor_convolution_moment: d must be >= 1");
  if (laws.size() != 1 && laws.size() != static_cast<std::size_t>(d)) {
    throw std::invalid_argument("tensor_convolution_moment: expected 1 or d = " + std::to_string(d) + " laws, got " +
                                std::to_string(laws.size()));
  }
  if (p == 0) return 1.0;
  for (const auto& law : laws) {
    if (law.max_order() < p) {
      throw std::invalid_argument("tensor_convolution_moment: law moments unavailable to order " + std::to_string(p));
    }
  }

  // Injective colorings only matter through which law each block receives, so
  // group the d slots into distinct law types with multiplicities.
  std::vector<MarginalLaw> types;
  std::vector<std::uint64_t> multiplicity;
  if (laws.size() == 1) {
    types.push_back(laws.front());
    multiplicity.push_back(static_cast<std::uint64_t>(d));
  } else {
    for (const auto& law : laws) {
      bool found = false;
      for (std::size_t t = 0; t < types.size(); ++t) {
        if (same_law(types[t], law, p)) {
          ++multiplicity[t];
          found = true;
          break;
        }
      }
      if (!found) {
        types.push_back(law);
        multiplicity.push_back(1);
      }
    }
  }
  std::vector<CumulantSequence> type_cumulants;
  for (const auto& law : types) type_cumulants.push_back(moments_to_free_cumulants(law));

  double total = 0.0;
  std::vector<CumulantSequence> block_cumulants;
  for (const auto& pi : enumerate_partitions(p)) {
    const std::size_t k = pi.block_count();
    const std::vector<int> labels = pi.labels();
    std::vector<std::size_t> assign(k, 0);
    // Odometer over type assignments of the k blocks.
    while (true) {
      std::vector<std::uint64_t> used(types.size(), 0);
      for (std::size_t b = 0; b < k; ++b) ++used[assign[b]];
      double count = 1.0;
      for (std::size_t t = 0; t < types.size(); ++t) {
        count *= static_cast<double>(falling_factorial(multiplicity[t], used[t]));
      }
      if (count != 0.0) {
        block_cumulants.clear();
        for (std::size_t b = 0; b < k; ++b) block_cumulants.push_back(type_cumulants[assign[b]]);
        const double tau = free_word_moment_from_cumulants(labels, block_cumulants);
        total += count * tau * tau;
      }
      std::size_t pos = 0;
      while (pos < k && ++assign[pos] == types.size()) assign[pos++] = 0;
      if (pos == k) break;
    }
  }
  if (dilated) total *= std::pow(static_cast<double>(d), -0.5 * p);
  return total;
}

Regime Regime::fixed(int d, std::vector<MarginalLaw> laws) {
  if (d < 1) throw std::invalid_argument("Regime::fixed: d must be >= 1");
  if (laws.empty()) throw std::invalid_argument("Regime::fixed: at least one law is required");
  return {Kind::FixedD, d, std::move(laws)};
}

Regime Regime::growing(std::vector<MarginalLaw> laws) { return {Kind::GrowingD, 0, std::move(laws)}; }

std::string Regime::name() const {
  if (kind == Kind::GrowingD) return "GrowingD";
  return "FixedD(" + std::to_string(d) + ")";
}

std::vector<double> predict_limit_moments(const Regime& regime, int p_max) {
  guard(p_max, kMaxMomentOrder, "predict_limit_moments");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(p_max));
  if (regime.kind == Regime::Kind::GrowingD) {
    for (const auto& law : regime.laws) {
      if (!same_law(law, regime.laws.front(), std::min(law.max_order(), regime.laws.front().max_order()))) {
        throw std::invalid_argument("GrowingD prediction requires identically distributed Kraus operators");
      }
      if (!law.is_centered(1e-9) || !law.is_normalized(1e-9)) {
        throw std::invalid_argument("GrowingD prediction requires a centered law with unit second moment");
      }
    }
    for (int p = 1; p <= p_max; ++p) out.push_back(static_cast<double>(nc2_count(p)));
    return out;
  }
  for (int p = 1; p <= p_max; ++p) out.push_back(tensor_convolution_moment(p, regime.d, regime.laws, true));
  return out;
}

}  // namespace free
}  // namespace spectra
