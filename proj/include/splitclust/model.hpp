#pragma once

// Block-model parameter types, adjacency sampling, and assumption predicates.
//
// Conventions used throughout the library:
//   * community labels are 1-based values in {1..K};
//   * arrays indexed by community use index (label - 1);
//   * node ids are 0-based and live in [0, n).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "splitclust/errors.hpp"
#include "splitclust/rng.hpp"

namespace splitclust {

// ---------------------------------------------------------------------------
// Membership

/// A community labeling over a set of node ids. Ids are kept sorted
/// ascending; labels are 1-based.
class Membership {
 public:
  Membership() = default;

  Membership(std::vector<int> node_ids, std::vector<int> labels)
      : ids_(std::move(node_ids)), labels_(std::move(labels)) {
    if (ids_.size() != labels_.size())
      throw std::invalid_argument("Membership: ids and labels differ in length");
    if (!std::is_sorted(ids_.begin(), ids_.end())) {
      std::vector<int> order(ids_.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return ids_[a] < ids_[b]; });
      std::vector<int> ids(ids_.size()), labs(ids_.size());
      for (std::size_t p = 0; p < order.size(); ++p) {
        ids[p] = ids_[order[p]];
        labs[p] = labels_[order[p]];
      }
      ids_ = std::move(ids);
      labels_ = std::move(labs);
    }
    for (std::size_t p = 0; p + 1 < ids_.size(); ++p)
      if (ids_[p] == ids_[p + 1]) throw std::invalid_argument("Membership: duplicate node id");
    for (int lab : labels_)
      if (lab < 1) throw std::invalid_argument("Membership: labels must be >= 1");
  }

  /// Labeling of the full node set 0..labels.size()-1.
  static Membership dense(std::vector<int> labels) {
    std::vector<int> ids(labels.size());
    std::iota(ids.begin(), ids.end(), 0);
    return Membership(std::move(ids), std::move(labels));
  }

  int size() const noexcept { return static_cast<int>(ids_.size()); }
  const std::vector<int>& ids() const noexcept { return ids_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int id_at(int pos) const { return ids_.at(pos); }
  int label_at(int pos) const { return labels_.at(pos); }

  int label_of(int node_id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), node_id);
    if (it == ids_.end() || *it != node_id)
      throw std::invalid_argument("Membership: node id not covered");
    return labels_[static_cast<std::size_t>(it - ids_.begin())];
  }

  bool contains(int node_id) const {
    return std::binary_search(ids_.begin(), ids_.end(), node_id);
  }

  int max_label() const {
    int m = 0;
    for (int lab : labels_) m = std::max(m, lab);
    return m;
  }

  /// True iff the covered ids are exactly 0..n-1.
  bool is_dense(int n) const {
    if (size() != n) return false;
    for (int p = 0; p < n; ++p)
      if (ids_[p] != p) return false;
    return true;
  }

  std::vector<int> class_sizes(int K) const {
    std::vector<int> sizes(K, 0);
    for (int lab : labels_) {
      if (lab > K) throw std::invalid_argument("Membership: label exceeds K");
      ++sizes[lab - 1];
    }
    return sizes;
  }

  /// Node ids grouped by label; entry k holds the ids with label k+1.
  std::vector<std::vector<int>> class_members(int K) const {
    std::vector<std::vector<int>> classes(K);
    for (int p = 0; p < size(); ++p) {
      const int lab = labels_[p];
      if (lab > K) throw std::invalid_argument("Membership: label exceeds K");
      classes[lab - 1].push_back(ids_[p]);
    }
    return classes;
  }

  /// Applies a label permutation: label l becomes perm[l-1].
  Membership relabeled(std::span<const int> perm) const {
    std::vector<int> labs(labels_);
    for (int& lab : labs) {
      if (lab > static_cast<int>(perm.size()))
        throw std::invalid_argument("Membership: permutation too short");
      lab = perm[lab - 1];
    }
    return Membership(ids_, std::move(labs));
  }

  friend bool operator==(const Membership& a, const Membership& b) = default;

 private:
  std::vector<int> ids_;
  std::vector<int> labels_;
};

/// Renumbers communities by smallest contained node id: the community of the
/// smallest id becomes 1, the next distinct community by ascending id 2, etc.
inline Membership canonical_labels(const Membership& m) {
  std::vector<int> map(static_cast<std::size_t>(m.max_label()), 0);
  int next = 1;
  std::vector<int> labs(m.labels());
  for (int& lab : labs) {
    if (map[lab - 1] == 0) map[lab - 1] = next++;
    lab = map[lab - 1];
  }
  return Membership(m.ids(), std::move(labs));
}

/// Contiguous block labeling with class sizes proportional to `proportions`
/// (largest-remainder-free rounding of cumulative sums; sizes sum to n).
inline Membership make_block_membership(int n, std::span<const double> proportions) {
  const int K = static_cast<int>(proportions.size());
  if (K < 1) throw std::invalid_argument("make_block_membership: need at least one community");
  double total = 0;
  for (double p : proportions) {
    if (!(p > 0)) throw std::invalid_argument("make_block_membership: proportions must be positive");
    total += p;
  }
  std::vector<int> labels(n);
  double cum = 0;
  int start = 0;
  for (int k = 0; k < K; ++k) {
    cum += proportions[k];
    const int end = (k == K - 1) ? n : static_cast<int>(std::lround(cum / total * n));
    for (int i = start; i < end && i < n; ++i) labels[i] = k + 1;
    start = std::max(start, end);
  }
  return Membership::dense(std::move(labels));
}

// ---------------------------------------------------------------------------
// Proper membership predicate

namespace detail {

/// Exact evaluation of `count >= frac * n` for the dyadic rational actually
/// stored in `frac`, avoiding float boundary flakiness at equality.
inline bool count_at_least_fraction(long long count, double frac, long long n) {
  if (frac <= 0) return true;
  int exp = 0;
  const double mant_scaled = std::frexp(frac, &exp);  // frac = mant_scaled * 2^exp
  const auto mant = static_cast<long long>(std::ldexp(mant_scaled, 53));
  const int shift = 53 - exp;  // frac * n == mant * n / 2^shift
  if (shift < 0 || shift > 100) {
    // Far outside the (0, 1] range this predicate is used with.
    return static_cast<double>(count) >= frac * static_cast<double>(n);
  }
  const __int128 lhs = static_cast<__int128>(count) << shift;
  const __int128 rhs = static_cast<__int128>(mant) * n;
  return lhs >= rhs;
}

}  // namespace detail

/// True iff every community k in 1..K has at least pi0 * n members in g,
/// where n is the FULL node count (not the size of the covered subset).
inline bool is_proper(const Membership& g, double pi0, int n, int K) {
  if (!(pi0 > 0)) throw std::invalid_argument("is_proper: pi0 must be positive");
  if (K < 1) throw std::invalid_argument("is_proper: K must be >= 1");
  const std::vector<int> sizes = g.class_sizes(K);
  for (int k = 0; k < K; ++k)
    if (!detail::count_at_least_fraction(sizes[k], pi0, n)) return false;
  return true;
}

/// K inferred as the largest label present in g.
inline bool is_proper(const Membership& g, double pi0, int n) {
  return is_proper(g, pi0, n, std::max(1, g.max_label()));
}

// ---------------------------------------------------------------------------
// Model parameters

/// Community-wise connectivity: edge probabilities are alpha * B0.
class BlockConnectivity {
 public:
  BlockConnectivity(int K, std::vector<double> b0_row_major, double alpha)
      : K_(K), b0_(std::move(b0_row_major)), alpha_(alpha) {
    if (K_ < 1) throw std::invalid_argument("BlockConnectivity: K must be >= 1");
    if (b0_.size() != static_cast<std::size_t>(K_) * K_)
      throw std::invalid_argument("BlockConnectivity: B0 must be K x K");
    double max_entry = 0;
    for (int i = 0; i < K_; ++i) {
      for (int j = 0; j < K_; ++j) {
        const double x = b0_[idx(i, j)];
        if (!(x >= 0.0 && x <= 1.0))
          throw std::invalid_argument("BlockConnectivity: B0 entries must lie in [0,1]");
        if (std::abs(x - b0_[idx(j, i)]) > 1e-12)
          throw std::invalid_argument("BlockConnectivity: B0 must be symmetric");
        max_entry = std::max(max_entry, x);
      }
    }
    if (std::abs(max_entry - 1.0) > 1e-12)
      throw std::invalid_argument("BlockConnectivity: max B0 entry must equal 1");
    // alpha = 0 is admitted (edgeless model); alpha * B0 stays in [0,1].
    if (!(alpha_ >= 0.0 && alpha_ <= 1.0))
      throw std::invalid_argument("BlockConnectivity: alpha must lie in [0,1]");
    // Mirror the upper triangle so the stored matrix is exactly symmetric.
    for (int i = 0; i < K_; ++i)
      for (int j = i + 1; j < K_; ++j) b0_[idx(j, i)] = b0_[idx(i, j)];
  }

  int communities() const noexcept { return K_; }
  double alpha() const noexcept { return alpha_; }

  /// 0-based community indices.
  double b0(int k, int l) const { return b0_.at(idx(k, l)); }
  double edge_prob(int k, int l) const { return alpha_ * b0_.at(idx(k, l)); }

  std::span<const double> b0_row(int k) const {
    return {b0_.data() + idx(k, 0), static_cast<std::size_t>(K_)};
  }

 private:
  std::size_t idx(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * K_ + j;
  }

  int K_;
  std::vector<double> b0_;
  double alpha_;
};

/// Per-node activeness in (0, 1] for the degree-corrected model.
class DegreeProfile {
 public:
  explicit DegreeProfile(std::vector<double> psi) : psi_(std::move(psi)) {
    for (double p : psi_)
      if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument("DegreeProfile: psi entries must lie in (0,1]");
  }

  int size() const noexcept { return static_cast<int>(psi_.size()); }
  double at(int i) const { return psi_.at(i); }
  const std::vector<double>& values() const noexcept { return psi_; }

  double min_value() const {
    return *std::min_element(psi_.begin(), psi_.end());
  }

  /// Identifiability: within every community the max psi must equal 1.
  bool identifiable(const Membership& g, int K) const {
    if (g.size() != size()) return false;
    std::vector<double> max_psi(K, 0.0);
    for (int p = 0; p < g.size(); ++p) {
      const int k = g.label_at(p) - 1;
      if (k >= K) return false;
      max_psi[k] = std::max(max_psi[k], psi_[g.id_at(p)]);
    }
    for (int k = 0; k < K; ++k)
      if (std::abs(max_psi[k] - 1.0) > 1e-12) return false;
    return true;
  }

 private:
  std::vector<double> psi_;
};

/// Asserted floors for the model assumptions (audited by check_assumptions).
struct AssumptionParams {
  double pi0 = 0;          // minimum community proportion, in (0, 1/K]
  double gamma = 0;        // row-separation floor of B0
  double gamma_tilde = 0;  // normalized-row separation floor
  double psi0 = 0;         // activeness floor

  void validate(int K) const {
    if (!(pi0 > 0) || !(gamma > 0) || !(gamma_tilde > 0) || !(psi0 > 0))
      throw std::invalid_argument("AssumptionParams: all parameters must be positive");
    if (pi0 > 1.0 / K + 1e-15)
      throw std::invalid_argument("AssumptionParams: pi0 must not exceed 1/K");
  }
};

// ---------------------------------------------------------------------------
// Adjacency matrix

/// Dense symmetric binary adjacency with zero diagonal. Immutable once built;
/// safe to share read-only across threads.
class AdjacencyMatrix {
 public:
  static AdjacencyMatrix zero(int n) { return AdjacencyMatrix(n); }

  static AdjacencyMatrix from_edges(int n, std::span<const std::pair<int, int>> edges) {
    AdjacencyMatrix A(n);
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n)
        throw std::invalid_argument("AdjacencyMatrix: edge endpoint out of range");
      if (u == v) throw std::invalid_argument("AdjacencyMatrix: self-loops are not allowed");
      A.set_edge(u, v);
    }
    return A;
  }

  int size() const noexcept { return n_; }

  std::uint8_t operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * n_ + j];
  }

  std::span<const std::uint8_t> row(int i) const {
    return {a_.data() + static_cast<std::size_t>(i) * n_, static_cast<std::size_t>(n_)};
  }

  long long edge_count() const {
    long long c = 0;
    for (int i = 0; i < n_; ++i) {
      const auto r = row(i);
      for (int j = i + 1; j < n_; ++j) c += r[j];
    }
    return c;
  }

  int degree(int i) const {
    const auto r = row(i);
    int d = 0;
    for (std::uint8_t x : r) d += x;
    return d;
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(edge_count()));
    for (int i = 0; i < n_; ++i) {
      const auto r = row(i);
      for (int j = i + 1; j < n_; ++j)
        if (r[j]) out.emplace_back(i, j);
    }
    return out;
  }

  /// Induced subgraph over `nodes` (must be sorted ascending, distinct).
  /// Position p in the result corresponds to original node nodes[p].
  AdjacencyMatrix induced(std::span<const int> nodes) const {
    const int m = static_cast<int>(nodes.size());
    AdjacencyMatrix sub(m);
    for (int p = 0; p < m; ++p) {
      const auto r = row(nodes[p]);
      for (int q = p + 1; q < m; ++q)
        if (r[nodes[q]]) sub.set_edge(p, q);
    }
    return sub;
  }

 private:
  explicit AdjacencyMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0) {
    if (n < 0) throw std::invalid_argument("AdjacencyMatrix: negative size");
  }

  void set_edge(int i, int j) {
    a_[static_cast<std::size_t>(i) * n_ + j] = 1;
    a_[static_cast<std::size_t>(j) * n_ + i] = 1;
  }

  int n_;
  std::vector<std::uint8_t> a_;

  friend AdjacencyMatrix sample_sbm(const BlockConnectivity&, const Membership&, std::uint64_t);
  friend AdjacencyMatrix sample_dcbm(const BlockConnectivity&, const Membership&,
                                     const DegreeProfile&, std::uint64_t);
};

// ---------------------------------------------------------------------------
// Samplers

namespace detail {

inline void require_dense_cover(const Membership& g, const char* who) {
  const int n = g.size();
  if (!g.is_dense(n)) throw std::invalid_argument(std::string(who) + ": g must cover 0..n-1");
}

}  // namespace detail

/// Samples an SBM adjacency: independent Bernoulli(alpha * B0(g_i, g_j)) on
/// the upper triangle in fixed row-major order, then mirrored. Deterministic
/// given the seed.
inline AdjacencyMatrix sample_sbm(const BlockConnectivity& model, const Membership& g,
                                  std::uint64_t seed) {
  detail::require_dense_cover(g, "sample_sbm");
  const int n = g.size();
  if (g.max_label() > model.communities())
    throw std::invalid_argument("sample_sbm: label exceeds model K");
  AdjacencyMatrix A(n);
  SplitRng rng(seed);
  const auto& labels = g.labels();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = model.edge_prob(labels[i] - 1, labels[j] - 1);
      if (rng.bernoulli(p)) A.set_edge(i, j);
    }
  }
  return A;
}

/// Samples a DCBM adjacency: edge probability psi_i * psi_j * alpha * B0.
/// Requires the identifiability normalization max_{i: g_i=k} psi_i = 1.
inline AdjacencyMatrix sample_dcbm(const BlockConnectivity& model, const Membership& g,
                                   const DegreeProfile& psi, std::uint64_t seed) {
  detail::require_dense_cover(g, "sample_dcbm");
  const int n = g.size();
  if (psi.size() != n) throw std::invalid_argument("sample_dcbm: psi length mismatch");
  if (g.max_label() > model.communities())
    throw std::invalid_argument("sample_dcbm: label exceeds model K");
  if (!psi.identifiable(g, model.communities()))
    throw std::invalid_argument("sample_dcbm: psi violates per-community max = 1");
  AdjacencyMatrix A(n);
  SplitRng rng(seed);
  const auto& labels = g.labels();
  const auto& pv = psi.values();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = pv[i] * pv[j] * model.edge_prob(labels[i] - 1, labels[j] - 1);
      if (rng.bernoulli(p)) A.set_edge(i, j);
    }
  }
  return A;
}

/// Draws psi_i ~ Uniform[psi_low, 1] and rescales each community so its max
/// is exactly 1 (the DCBM identifiability normalization).
inline DegreeProfile sample_degree_profile(int n, double psi_low, const Membership& g, int K,
                                           std::uint64_t seed) {
  if (!(psi_low > 0 && psi_low <= 1))
    throw std::invalid_argument("sample_degree_profile: psi_low must lie in (0,1]");
  detail::require_dense_cover(g, "sample_degree_profile");
  if (g.size() != n) throw std::invalid_argument("sample_degree_profile: size mismatch");
  SplitRng rng(seed);
  std::vector<double> psi(n);
  for (double& p : psi) p = psi_low + (1.0 - psi_low) * rng.next_double();
  std::vector<double> max_psi(K, 0.0);
  const auto& labels = g.labels();
  for (int i = 0; i < n; ++i) max_psi[labels[i] - 1] = std::max(max_psi[labels[i] - 1], psi[i]);
  for (int i = 0; i < n; ++i) psi[i] /= max_psi[labels[i] - 1];
  return DegreeProfile(std::move(psi));
}

// ---------------------------------------------------------------------------
// Assumption audit

struct AssumptionReport {
  double gamma_achieved = 0;                        // min l2 distance between B0 rows
  std::optional<double> gamma_tilde_achieved;       // nullopt if some B0 row is all-zero
  bool zero_row_violation = false;
  double pi0_achieved = 0;                          // min_k |I_k| / n
  std::optional<double> psi0_achieved;              // min psi, when psi given
};

namespace detail {

inline double row_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double norm2(std::span<const double> a) {
  double s = 0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

inline AssumptionReport check_assumptions(const BlockConnectivity& model, const Membership& g,
                                          const DegreeProfile* psi = nullptr) {
  const int K = model.communities();
  AssumptionReport rep;

  double gamma = std::numeric_limits<double>::infinity();
  double gamma_tilde = std::numeric_limits<double>::infinity();
  bool zero_row = false;
  std::vector<std::vector<double>> normalized(K);
  for (int k = 0; k < K; ++k) {
    const auto row = model.b0_row(k);
    const double nrm = detail::norm2(row);
    if (nrm == 0.0) {
      zero_row = true;
    } else {
      normalized[k].assign(row.begin(), row.end());
      for (double& x : normalized[k]) x /= nrm;
    }
  }
  for (int k = 0; k < K; ++k) {
    for (int l = k + 1; l < K; ++l) {
      gamma = std::min(gamma, detail::row_distance(model.b0_row(k), model.b0_row(l)));
      if (!zero_row)
        gamma_tilde = std::min(gamma_tilde, detail::row_distance(normalized[k], normalized[l]));
    }
  }
  rep.gamma_achieved = (K > 1) ? gamma : std::numeric_limits<double>::infinity();
  rep.zero_row_violation = zero_row;
  if (!zero_row)
    rep.gamma_tilde_achieved =
        (K > 1) ? gamma_tilde : std::numeric_limits<double>::infinity();

  const std::vector<int> sizes = g.class_sizes(K);
  int min_size = g.size();
  for (int s : sizes) min_size = std::min(min_size, s);
  rep.pi0_achieved = g.size() > 0 ? static_cast<double>(min_size) / g.size() : 0.0;

  if (psi != nullptr) rep.psi0_achieved = psi->min_value();
  return rep;
}

}  // namespace splitclust
