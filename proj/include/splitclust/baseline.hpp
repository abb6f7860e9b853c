#pragma once

// Initial community recovery strategies: spectral clustering for the SBM and
// spherical spectral clustering for the DCBM, behind a name-keyed registry so
// callers (and the CLI) can select one as the preliminary recoverer.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "splitclust/linalg.hpp"
#include "splitclust/model.hpp"

namespace splitclust {

/// Strategy signature: full labeling of the given adjacency matrix.
/// Implementations must be pure given (A, K, seed).
using RecovererFn =
    std::function<Membership(const AdjacencyMatrix& A, int K, std::uint64_t seed)>;

/// k-means on the rows of the top-K eigenvectors of the adjacency matrix.
inline Membership spectral_clustering(const AdjacencyMatrix& A, int K, std::uint64_t seed) {
  const int n = A.size();
  if (K < 1 || K > n) throw std::invalid_argument("spectral_clustering: K must lie in [1, n]");
  if (K == 1) return Membership::dense(std::vector<int>(n, 1));

  const EigenPairs eig = top_k_eigs(A, K);
  PointSet pts;
  pts.dim = K;
  pts.coords = eig.vectors;
  pts.ids.resize(n);
  std::iota(pts.ids.begin(), pts.ids.end(), 0);
  return canonical_labels(kmeans(pts, K, seed));
}

/// Spectral clustering on l2-normalized eigenvector rows. Rows with zero norm
/// (isolated nodes) are held out of k-means and afterwards assigned to the
/// community whose center is nearest to the origin, ties to the lowest index.
inline Membership spherical_spectral_clustering(const AdjacencyMatrix& A, int K,
                                                std::uint64_t seed) {
  const int n = A.size();
  if (K < 1 || K > n)
    throw std::invalid_argument("spherical_spectral_clustering: K must lie in [1, n]");
  if (K == 1) return Membership::dense(std::vector<int>(n, 1));

  const EigenPairs eig = top_k_eigs(A, K);
  PointSet pts;
  pts.dim = K;
  std::vector<int> zero_rows;
  for (int i = 0; i < n; ++i) {
    const auto r = eig.row(i);
    double nrm = 0;
    for (double x : r) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) {
      zero_rows.push_back(i);
      continue;
    }
    for (double x : r) pts.coords.push_back(x / nrm);
    pts.ids.push_back(i);
  }

  std::vector<int> labels(n, 1);
  if (!pts.ids.empty()) {
    const int k_eff = std::min<int>(K, pts.size());
    KMeansResult res = kmeans_full(pts, k_eff, seed);
    for (int p = 0; p < pts.size(); ++p) labels[pts.ids[p]] = res.labels[p];
    if (!zero_rows.empty()) {
      int best = 0;
      double bestd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k_eff; ++c) {
        double nrm = 0;
        for (int t = 0; t < pts.dim; ++t) {
          const double x = res.centers[static_cast<std::size_t>(c) * pts.dim + t];
          nrm += x * x;
        }
        if (nrm < bestd) {
          bestd = nrm;
          best = c;
        }
      }
      for (int i : zero_rows) labels[i] = best + 1;
    }
  }
  return canonical_labels(Membership::dense(std::move(labels)));
}

/// An initial recovery strategy plus its metadata.
struct InitialRecoverer {
  RecovererFn fn;
  std::string name;
  std::string intended_model;  // which model class it targets

  Membership operator()(const AdjacencyMatrix& A, int K, std::uint64_t seed) const {
    return fn(A, K, seed);
  }
};

/// Registry of initial recoverers selectable by name.
inline const std::map<std::string, InitialRecoverer>& recoverer_registry() {
  static const std::map<std::string, InitialRecoverer> registry = {
      {"spectral",
       {[](const AdjacencyMatrix& A, int K, std::uint64_t seed) {
          return spectral_clustering(A, K, seed);
        },
        "spectral", "sbm"}},
      {"spherical",
       {[](const AdjacencyMatrix& A, int K, std::uint64_t seed) {
          return spherical_spectral_clustering(A, K, seed);
        },
        "spherical", "dcbm"}},
  };
  return registry;
}

}  // namespace splitclust
