#pragma once

// Community recovery by sample splitting: the cross-clustering embedding, the
// minimum-spanning-tree clustering subroutine, the two cross-clustering
// passes (plain and spherical), and the pipelines built from them (two-way
// split, V-fold, self-cross).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "splitclust/assignment.hpp"
#include "splitclust/baseline.hpp"
#include "splitclust/errors.hpp"
#include "splitclust/linalg.hpp"
#include "splitclust/model.hpp"
#include "splitclust/rng.hpp"

namespace splitclust {

// ---------------------------------------------------------------------------
// Node splitting

/// A random balanced bipartition of [0, n). For odd n, v1 holds the extra
/// node so the initial recoverer sees the larger half.
struct SplitPlan {
  std::vector<int> v1;
  std::vector<int> v2;
  std::uint64_t seed = 0;
};

inline SplitPlan split_nodes(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("split_nodes: need at least two nodes");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  SplitRng rng(seed);
  shuffle(perm, rng);
  const int half = (n + 1) / 2;
  SplitPlan plan;
  plan.seed = seed;
  plan.v1.assign(perm.begin(), perm.begin() + half);
  plan.v2.assign(perm.begin() + half, perm.end());
  std::sort(plan.v1.begin(), plan.v1.end());
  std::sort(plan.v2.begin(), plan.v2.end());
  return plan;
}

/// V near-equal folds of [0, n); sizes differ by at most one, each sorted.
inline std::vector<std::vector<int>> split_folds(int n, int V, std::uint64_t seed) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  SplitRng rng(seed);
  shuffle(perm, rng);
  std::vector<std::vector<int>> folds(V);
  const int base = n / V;
  const int rem = n % V;
  auto it = perm.begin();
  for (int j = 0; j < V; ++j) {
    const int sz = base + (j < rem ? 1 : 0);
    folds[j].assign(it, it + sz);
    std::sort(folds[j].begin(), folds[j].end());
    it += sz;
  }
  return folds;
}

// ---------------------------------------------------------------------------
// Cross-clustering embedding

/// Estimated community-wise edge frequencies for one node: h[k] is the mean
/// adjacency toward the labeled class k. Coordinates whose class is empty are
/// flagged undefined and set to zero.
struct NodeEmbedding {
  int node = 0;
  std::vector<double> h;
  std::vector<std::uint8_t> undefined;
};

/// For each v in v2, h_{v,k} = (sum of A(v,v') over v' in v1 with label k)
/// divided by the class size. g1 must label exactly v1. In the self-cross
/// variant v1 and v2 overlap and the zero diagonal enters the averages.
inline std::vector<NodeEmbedding> cross_embed(const AdjacencyMatrix& A,
                                              std::span<const int> v1, std::span<const int> v2,
                                              const Membership& g1, int K) {
  if (v1.empty()) throw std::invalid_argument("cross_embed: empty reference set");
  if (K < 1) throw std::invalid_argument("cross_embed: K must be >= 1");
  if (static_cast<int>(v1.size()) != g1.size() ||
      !std::equal(v1.begin(), v1.end(), g1.ids().begin()))
    throw std::invalid_argument("cross_embed: g1 must label exactly v1");

  const std::vector<std::vector<int>> classes = g1.class_members(K);
  std::vector<NodeEmbedding> out;
  out.reserve(v2.size());
  for (int v : v2) {
    const auto row = A.row(v);
    NodeEmbedding emb;
    emb.node = v;
    emb.h.assign(K, 0.0);
    emb.undefined.assign(K, 0);
    for (int k = 0; k < K; ++k) {
      if (classes[k].empty()) {
        emb.undefined[k] = 1;
        continue;
      }
      long long s = 0;
      for (int u : classes[k]) s += row[u];
      emb.h[k] = static_cast<double>(s) / static_cast<double>(classes[k].size());
    }
    out.push_back(std::move(emb));
  }
  return out;
}

// ---------------------------------------------------------------------------
// MST clustering subroutine

/// Builds the Euclidean minimum spanning tree, removes the K-1 largest edges
/// (ties broken by lexicographic endpoint ids), and labels the resulting
/// components 1..K in order of smallest contained node id.
inline Membership mst_cluster(const PointSet& pts, int K) {
  const int m = pts.size();
  if (K < 1) throw std::invalid_argument("mst_cluster: K must be >= 1");
  if (m < K) throw std::invalid_argument("mst_cluster: fewer points than clusters");

  struct Edge {
    int u, v;  // positions, u < v
    double w;
  };
  std::vector<Edge> mst;
  if (m > 1) {
    // Prim's algorithm; ties go to the lowest-index node.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(m, inf);
    std::vector<int> parent(m, -1);
    std::vector<char> in_tree(m, 0);
    best[0] = 0;
    for (int step = 0; step < m; ++step) {
      int u = -1;
      for (int i = 0; i < m; ++i)
        if (!in_tree[i] && (u < 0 || best[i] < best[u])) u = i;
      in_tree[u] = 1;
      if (parent[u] >= 0)
        mst.push_back({std::min(u, parent[u]), std::max(u, parent[u]), best[u]});
      for (int i = 0; i < m; ++i) {
        if (in_tree[i]) continue;
        const double d = detail::dist2(pts.point(u), pts.point(i));
        if (d < best[i]) {
          best[i] = d;
          parent[i] = u;
        }
      }
    }
  }

  std::sort(mst.begin(), mst.end(), [](const Edge& a, const Edge& b) {
    if (a.w != b.w) return a.w > b.w;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });

  // Union the edges that survive deletion of the K-1 largest.
  std::vector<int> uf(m);
  std::iota(uf.begin(), uf.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  for (std::size_t e = static_cast<std::size_t>(K - 1); e < mst.size(); ++e)
    uf[find(mst[e].u)] = find(mst[e].v);

  // Label components 1..K by ascending smallest node id.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return pts.ids[a] < pts.ids[b]; });
  std::vector<int> comp_label(m, 0);
  std::vector<int> labels(m, 0);
  int next = 1;
  for (int pos : order) {
    const int root = find(pos);
    if (comp_label[root] == 0) comp_label[root] = next++;
    labels[pos] = comp_label[root];
  }
  return Membership(pts.ids, std::move(labels));
}

// ---------------------------------------------------------------------------
// Clustering subroutine interface

/// Distance-based clusterer consuming embedded points. MST ignores the seed;
/// k-means uses it for initialization.
using ClusterFn = std::function<Membership(const PointSet&, int K, std::uint64_t seed)>;

inline ClusterFn mst_subroutine() {
  return [](const PointSet& pts, int K, std::uint64_t) { return mst_cluster(pts, K); };
}

inline ClusterFn kmeans_subroutine(int restarts = 10, int max_iters = 100) {
  return [restarts, max_iters](const PointSet& pts, int K, std::uint64_t seed) {
    return kmeans(pts, K, seed, restarts, max_iters);
  };
}

inline const std::map<std::string, ClusterFn>& subroutine_registry() {
  static const std::map<std::string, ClusterFn> registry = {
      {"mst", mst_subroutine()},
      {"kmeans", kmeans_subroutine()},
  };
  return registry;
}

// ---------------------------------------------------------------------------
// Cross clustering

/// What one cross-clustering pass fed to the subroutine and produced; kept so
/// tests can audit separation conditions on the exact points D consumed.
struct CrossTrace {
  PointSet fed_points;        // embeddings handed to D (normalized in sphere mode)
  Membership d_labels;        // D output on fed_points
  std::vector<int> held_out;  // zero-norm nodes assigned by the fallback rule
  Membership result;          // full labeling of v2
};

namespace detail {

inline CrossTrace cross_clust_impl(const AdjacencyMatrix& A, std::span<const int> v1,
                                   std::span<const int> v2, const Membership& g1, int K,
                                   const ClusterFn& D, std::uint64_t dseed, bool spherical) {
  const std::vector<NodeEmbedding> embs = cross_embed(A, v1, v2, g1, K);
  CrossTrace trace;
  trace.fed_points.dim = K;

  if (!spherical) {
    for (const NodeEmbedding& e : embs) {
      trace.fed_points.ids.push_back(e.node);
      trace.fed_points.coords.insert(trace.fed_points.coords.end(), e.h.begin(), e.h.end());
    }
    trace.d_labels = canonical_labels(D(trace.fed_points, K, dseed));
    trace.result = trace.d_labels;
    return trace;
  }

  for (const NodeEmbedding& e : embs) {
    double nrm = 0;
    for (double x : e.h) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) {
      trace.held_out.push_back(e.node);
      continue;
    }
    trace.fed_points.ids.push_back(e.node);
    for (double x : e.h) trace.fed_points.coords.push_back(x / nrm);
  }

  std::vector<int> ids(v2.begin(), v2.end());
  std::vector<int> labels(v2.size(), 1);
  if (!trace.fed_points.ids.empty()) {
    const int k_eff = std::min<int>(K, trace.fed_points.size());
    trace.d_labels = canonical_labels(D(trace.fed_points, k_eff, dseed));
    std::map<int, int> by_id;
    for (int p = 0; p < trace.d_labels.size(); ++p)
      by_id[trace.d_labels.id_at(p)] = trace.d_labels.label_at(p);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto it = by_id.find(ids[i]);
      if (it != by_id.end()) labels[i] = it->second;
    }
    if (!trace.held_out.empty()) {
      // Class means of the normalized embeddings; a zero node goes to the
      // community whose mean is nearest the origin, ties to the lowest label.
      std::vector<std::vector<double>> mean(k_eff, std::vector<double>(K, 0.0));
      std::vector<int> count(k_eff, 0);
      for (int p = 0; p < trace.fed_points.size(); ++p) {
        const int lab = by_id.at(trace.fed_points.ids[p]) - 1;
        const auto pt = trace.fed_points.point(p);
        for (int t = 0; t < K; ++t) mean[lab][t] += pt[t];
        ++count[lab];
      }
      int best = 0;
      double bestd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k_eff; ++c) {
        if (count[c] == 0) continue;
        double nrm = 0;
        for (double x : mean[c]) nrm += (x / count[c]) * (x / count[c]);
        if (nrm < bestd) {
          bestd = nrm;
          best = c;
        }
      }
      for (int held : trace.held_out)
        for (std::size_t i = 0; i < ids.size(); ++i)
          if (ids[i] == held) labels[i] = best + 1;
    }
  }
  trace.result = canonical_labels(Membership(std::move(ids), std::move(labels)));
  return trace;
}

}  // namespace detail

/// One cross-clustering pass: embed v2 against the labeled set v1, then apply
/// the distance-based subroutine D (default: MST clustering).
inline Membership cross_clust(const AdjacencyMatrix& A, std::span<const int> v1,
                              std::span<const int> v2, const Membership& g1, int K,
                              const ClusterFn& D = mst_subroutine(), std::uint64_t dseed = 0) {
  return detail::cross_clust_impl(A, v1, v2, g1, K, D, dseed, false).result;
}

/// Spherical variant: embeddings are l2-normalized before D. Zero-norm nodes
/// are held out and assigned to the community with the nearest normalized
/// class-mean embedding.
inline Membership cross_clust_sphere(const AdjacencyMatrix& A, std::span<const int> v1,
                                     std::span<const int> v2, const Membership& g1, int K,
                                     const ClusterFn& D = mst_subroutine(),
                                     std::uint64_t dseed = 0) {
  return detail::cross_clust_impl(A, v1, v2, g1, K, D, dseed, true).result;
}

// ---------------------------------------------------------------------------
// Pipelines

/// Everything a two-way split run looked at, for auditing.
struct SplitClustTrace {
  SplitPlan plan;
  Membership g1hat;   // initial recovery on v1
  Membership g2hat;   // cross-clustered labels on v2
  Membership ghat;    // final labels on [0, n)
  CrossTrace step3;   // v1 -> v2 pass
  CrossTrace step4;   // v2 -> [n] pass
};

namespace detail {

inline Membership remap_positions(const Membership& local, std::span<const int> nodes) {
  std::vector<int> labels(local.size());
  for (int p = 0; p < local.size(); ++p) labels[local.id_at(p)] = local.label_at(p);
  return Membership(std::vector<int>(nodes.begin(), nodes.end()), std::move(labels));
}

}  // namespace detail

/// Two-way sample splitting: random split, initial recovery on the induced
/// first half, cross-cluster into the second half, then cross-cluster from
/// the second half into the full node set.
inline SplitClustTrace split_clust_traced(const AdjacencyMatrix& A, int K, const RecovererFn& S,
                                          const ClusterFn& D, std::uint64_t seed,
                                          bool spherical = false) {
  const int n = A.size();
  if (n < 2 * K) throw std::invalid_argument("split_clust: need n >= 2K");

  SplitClustTrace tr;
  tr.plan = split_nodes(n, derive_seed(seed, 1));

  const AdjacencyMatrix A1 = A.induced(tr.plan.v1);
  tr.g1hat = canonical_labels(
      detail::remap_positions(S(A1, K, derive_seed(seed, 2)), tr.plan.v1));

  tr.step3 = detail::cross_clust_impl(A, tr.plan.v1, tr.plan.v2, tr.g1hat, K, D,
                                      derive_seed(seed, 3), spherical);
  tr.g2hat = tr.step3.result;

  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  tr.step4 = detail::cross_clust_impl(A, tr.plan.v2, all, tr.g2hat, K, D, derive_seed(seed, 4),
                                      spherical);
  tr.ghat = tr.step4.result;
  return tr;
}

inline Membership split_clust(const AdjacencyMatrix& A, int K, const RecovererFn& S,
                              const ClusterFn& D, std::uint64_t seed, bool spherical = false) {
  return split_clust_traced(A, K, S, D, seed, spherical).ghat;
}

/// V-fold cross clustering: each fold is labeled by cross-clustering from the
/// union of the remaining folds, then the per-fold labelings are merged by
/// maximizing cross-fold edge-density agreement against fold 1.
inline Membership vfold_clust(const AdjacencyMatrix& A, int K, int V, const RecovererFn& S,
                              const ClusterFn& D, std::uint64_t seed, bool spherical = false) {
  const int n = A.size();
  if (V < 2) throw std::invalid_argument("vfold_clust: V must be >= 2");
  if (n < V * K) throw std::invalid_argument("vfold_clust: need n >= V*K");

  const std::vector<std::vector<int>> folds = split_folds(n, V, derive_seed(seed, 1));
  std::vector<Membership> fold_labels;
  fold_labels.reserve(V);
  for (int j = 0; j < V; ++j) {
    std::vector<int> minus;
    minus.reserve(n - folds[j].size());
    for (int l = 0; l < V; ++l)
      if (l != j) minus.insert(minus.end(), folds[l].begin(), folds[l].end());
    std::sort(minus.begin(), minus.end());

    const AdjacencyMatrix Am = A.induced(minus);
    const Membership gm = canonical_labels(
        detail::remap_positions(S(Am, K, derive_seed(seed, 100 + j)), minus));
    const Membership gj = detail::cross_clust_impl(A, minus, folds[j], gm, K, D,
                                                   derive_seed(seed, 200 + j), spherical)
                              .result;
    std::vector<int> seen(K, 0);
    for (int lab : gj.labels()) seen[lab - 1] = 1;
    if (std::accumulate(seen.begin(), seen.end(), 0) < K)
      throw numerical_error("vfold_clust: fold " + std::to_string(j + 1) +
                            " produced fewer than " + std::to_string(K) + " communities");
    fold_labels.push_back(gj);
  }

  // Merge: match each fold's classes to fold 1's by cross-fold edge density.
  const std::vector<std::vector<int>> ref_classes = fold_labels[0].class_members(K);
  std::vector<int> ids, labels;
  ids.insert(ids.end(), fold_labels[0].ids().begin(), fold_labels[0].ids().end());
  labels.insert(labels.end(), fold_labels[0].labels().begin(), fold_labels[0].labels().end());
  for (int j = 1; j < V; ++j) {
    const std::vector<std::vector<int>> classes = fold_labels[j].class_members(K);
    std::vector<double> density(static_cast<std::size_t>(K) * K, 0.0);
    for (int c = 0; c < K; ++c) {
      for (int r = 0; r < K; ++r) {
        long long edges = 0;
        for (int u : classes[c]) {
          const auto row = A.row(u);
          for (int w : ref_classes[r]) edges += row[w];
        }
        density[static_cast<std::size_t>(c) * K + r] =
            static_cast<double>(edges) /
            (static_cast<double>(classes[c].size()) * ref_classes[r].size());
      }
    }
    const detail::Assignment match = (K <= 8) ? detail::max_assignment_brute(density, K)
                                              : detail::max_assignment(density, K);
    for (int p = 0; p < fold_labels[j].size(); ++p) {
      ids.push_back(fold_labels[j].id_at(p));
      labels.push_back(match.match[fold_labels[j].label_at(p) - 1] + 1);
    }
  }
  return canonical_labels(Membership(std::move(ids), std::move(labels)));
}

/// Self-cross clustering: initial recovery on the full graph, then a single
/// cross-clustering pass with v1 = v2 = [n]. Experimental; no exactness
/// guarantee is claimed for it.
inline Membership self_cross_clust(const AdjacencyMatrix& A, int K, const RecovererFn& S,
                                   const ClusterFn& D, std::uint64_t seed,
                                   bool spherical = false) {
  const int n = A.size();
  if (n < 2 * K) throw std::invalid_argument("self_cross_clust: need n >= 2K");
  const Membership g0 = canonical_labels(S(A, K, derive_seed(seed, 2)));
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  return detail::cross_clust_impl(A, all, all, g0, K, D, derive_seed(seed, 3), spherical)
      .result;
}

// ---------------------------------------------------------------------------
// Weighted connectivity (diagnostic; needs ground-truth psi)

/// B~(i,j) = (average psi over class j of g1) * alpha * B0(i,j): the matrix
/// whose normalized rows the spherical embedding targets under the DCBM.
inline std::vector<double> weighted_connectivity(const BlockConnectivity& model,
                                                 const DegreeProfile& psi, const Membership& g1,
                                                 int K) {
  const std::vector<std::vector<int>> classes = g1.class_members(K);
  std::vector<double> avg(K, 0.0);
  for (int k = 0; k < K; ++k) {
    if (classes[k].empty())
      throw std::invalid_argument("weighted_connectivity: empty class " + std::to_string(k + 1));
    double s = 0;
    for (int v : classes[k]) s += psi.at(v);
    avg[k] = s / classes[k].size();
  }
  std::vector<double> bt(static_cast<std::size_t>(K) * K, 0.0);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      bt[static_cast<std::size_t>(i) * K + j] = avg[j] * model.edge_prob(i, j);
  return bt;
}

}  // namespace splitclust
