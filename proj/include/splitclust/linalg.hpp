#pragma once

// Self-contained numerical kernels: dense symmetric eigendecomposition
// (Householder tridiagonalization + implicit-shift QL), seeded k-means with
// distance-weighted initialization, and pairwise separation statistics.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitclust/errors.hpp"
#include "splitclust/model.hpp"
#include "splitclust/rng.hpp"

namespace splitclust {

// ---------------------------------------------------------------------------
// Point sets

/// m points in R^dim with aligned node identities.
struct PointSet {
  int dim = 0;
  std::vector<double> coords;  // m x dim, row-major
  std::vector<int> ids;

  int size() const noexcept { return static_cast<int>(ids.size()); }

  std::span<const double> point(int i) const {
    return {coords.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }

  void validate() const {
    if (coords.size() != static_cast<std::size_t>(size()) * dim)
      throw std::invalid_argument("PointSet: coords size mismatch");
    for (double x : coords)
      if (!std::isfinite(x)) throw std::invalid_argument("PointSet: non-finite coordinate");
    std::vector<int> sorted(ids);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("PointSet: duplicate ids");
  }
};

namespace detail {

inline double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition

/// Top-K eigenpairs ordered by |eigenvalue| descending. vectors is n x K
/// row-major; row i holds the i-th coordinate of each selected eigenvector,
/// so rows serve directly as spectral embedding points.
struct EigenPairs {
  int n = 0;
  int k = 0;
  std::vector<double> values;
  std::vector<double> vectors;

  std::span<const double> row(int i) const {
    return {vectors.data() + static_cast<std::size_t>(i) * k, static_cast<std::size_t>(k)};
  }
};

namespace detail {

/// Householder reduction of a symmetric matrix (row-major, overwritten) to
/// tridiagonal form; q accumulates the orthogonal transform, d/e receive the
/// diagonal and subdiagonal.
inline void tridiagonalize(std::vector<double>& a, int n, std::vector<double>& q,
                           std::vector<double>& d, std::vector<double>& e) {
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  auto Q = [&](int i, int j) -> double& { return q[static_cast<std::size_t>(i) * n + j]; };

  q.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) Q(i, i) = 1.0;
  d.assign(n, 0.0);
  e.assign(n, 0.0);

  std::vector<double> v(n), p(n), w(n);
  for (int kcol = 0; kcol + 2 < n; ++kcol) {
    const int lo = kcol + 1;
    // Scale the column first; keeps the Householder norms away from
    // underflow on nearly-zero columns.
    double scale = 0;
    for (int i = lo; i < n; ++i) scale += std::abs(A(i, kcol));
    if (scale == 0.0) {
      e[kcol] = 0.0;
      continue;
    }
    double norm2 = 0;
    for (int i = lo; i < n; ++i) {
      v[i] = A(i, kcol) / scale;
      norm2 += v[i] * v[i];
    }
    double alpha = std::sqrt(norm2);
    if (v[lo] > 0) alpha = -alpha;

    // Householder vector v on rows lo..n-1, H = I - beta v v^T (scale-free).
    v[lo] -= alpha;
    double vnorm2 = 0;
    for (int i = lo; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) {
      e[kcol] = alpha * scale;
      continue;
    }
    const double beta = 2.0 / vnorm2;

    // Symmetric update of the trailing block: A <- H A H.
    double pv = 0;
    for (int i = lo; i < n; ++i) {
      double s = 0;
      for (int j = lo; j < n; ++j) s += A(i, j) * v[j];
      p[i] = beta * s;
      pv += p[i] * v[i];
    }
    const double half = 0.5 * beta * pv;
    for (int i = lo; i < n; ++i) w[i] = p[i] - half * v[i];
    for (int i = lo; i < n; ++i)
      for (int j = lo; j < n; ++j) A(i, j) -= v[i] * w[j] + w[i] * v[j];

    A(lo, kcol) = alpha * scale;
    A(kcol, lo) = alpha * scale;
    for (int i = lo + 1; i < n; ++i) {
      A(i, kcol) = 0.0;
      A(kcol, i) = 0.0;
    }

    // Accumulate Q <- Q H (columns lo..n-1 only).
    for (int r = 0; r < n; ++r) {
      double s = 0;
      for (int i = lo; i < n; ++i) s += Q(r, i) * v[i];
      s *= beta;
      for (int i = lo; i < n; ++i) Q(r, i) -= s * v[i];
    }
  }

  for (int i = 0; i < n; ++i) d[i] = A(i, i);
  for (int i = 0; i + 1 < n; ++i) e[i] = A(i + 1, i);
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix. qt holds
/// the transform TRANSPOSED (row j = eigenvector j), so each rotation is a
/// pair of contiguous row operations. Throws numerical_error past the
/// iteration cap.
inline void ql_implicit(std::vector<double>& d, std::vector<double>& e, std::vector<double>& qt,
                        int n, long max_total_iters) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  long total = 0;
  e[n - 1] = 0.0;

  // Absolute deflation floor at eps * ||T||; the relative test alone cannot
  // split blocks whose diagonal is exactly zero (bipartite-like graphs).
  double anorm = 0;
  for (int i = 0; i < n; ++i) anorm = std::max(anorm, std::abs(d[i]) + std::abs(e[i]));
  const double floor_tol = eps * anorm;

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    for (;;) {
      int m = l;
      for (; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::max(eps * dd, floor_tol)) break;
      }
      if (m == l) break;
      if (++iter > 60 || ++total > max_total_iters)
        throw numerical_error(
            "symmetric eigensolver did not converge (index " + std::to_string(l) + ", " +
                std::to_string(total) + " iterations)",
            total);

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (int i = m - 1; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        double* lo_row = qt.data() + static_cast<std::size_t>(i) * n;
        double* hi_row = qt.data() + static_cast<std::size_t>(i + 1) * n;
        for (int col = 0; col < n; ++col) {
          f = hi_row[col];
          hi_row[col] = s * lo_row[col] + c * f;
          lo_row[col] = c * lo_row[col] - s * f;
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

}  // namespace detail

/// Full eigendecomposition of a dense symmetric matrix followed by selection
/// of the K pairs of largest |eigenvalue|. `a` is n x n row-major (consumed).
/// Residuals are verified against tol * max|eigenvalue|.
inline EigenPairs sym_eigs(std::vector<double> a, int n, int K, double tol = 1e-10) {
  if (n < 1) throw std::invalid_argument("sym_eigs: empty matrix");
  if (K < 1 || K > n) throw std::invalid_argument("sym_eigs: K must lie in [1, n]");
  if (!(tol > 0)) throw std::invalid_argument("sym_eigs: tol must be positive");
  if (a.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("sym_eigs: matrix size mismatch");

  const std::vector<double> original = a;
  std::vector<double> qt, d, e;
  if (n == 1) {
    d = {a[0]};
    qt = {1.0};
  } else {
    std::vector<double> q;
    detail::tridiagonalize(a, n, q, d, e);
    qt.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        qt[static_cast<std::size_t>(j) * n + i] = q[static_cast<std::size_t>(i) * n + j];
    detail::ql_implicit(d, e, qt, n, std::max(10L * n, 300L));
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const double ax = std::abs(d[x]), ay = std::abs(d[y]);
    if (ax != ay) return ax > ay;
    if (d[x] != d[y]) return d[x] > d[y];
    return x < y;
  });

  EigenPairs out;
  out.n = n;
  out.k = K;
  out.values.resize(K);
  out.vectors.assign(static_cast<std::size_t>(n) * K, 0.0);
  for (int j = 0; j < K; ++j) {
    const double* vec = qt.data() + static_cast<std::size_t>(order[j]) * n;
    out.values[j] = d[order[j]];
    // Canonical sign: the entry of largest magnitude is positive.
    int arg = 0;
    double best = -1;
    for (int i = 0; i < n; ++i) {
      if (std::abs(vec[i]) > best) {
        best = std::abs(vec[i]);
        arg = i;
      }
    }
    const double sign = vec[arg] < 0 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i)
      out.vectors[static_cast<std::size_t>(i) * K + j] = sign * vec[i];
  }

  // Residual contract: ||A u - lambda u|| <= tol * ||A||.
  double norm_a = 0;
  for (int i = 0; i < n; ++i) norm_a = std::max(norm_a, std::abs(d[i]));
  for (int j = 0; j < K; ++j) {
    double resid2 = 0;
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int l = 0; l < n; ++l)
        s += original[static_cast<std::size_t>(i) * n + l] *
             out.vectors[static_cast<std::size_t>(l) * K + j];
      const double r = s - out.values[j] * out.vectors[static_cast<std::size_t>(i) * K + j];
      resid2 += r * r;
    }
    if (std::sqrt(resid2) > tol * std::max(norm_a, 1e-300) && norm_a > 0)
      throw numerical_error("sym_eigs: residual exceeds tolerance for eigenpair " +
                            std::to_string(j));
  }
  return out;
}

/// Top-K eigenpairs of an adjacency matrix by |eigenvalue|.
inline EigenPairs top_k_eigs(const AdjacencyMatrix& A, int K, double tol = 1e-10) {
  const int n = A.size();
  if (K > n) throw std::invalid_argument("top_k_eigs: K exceeds matrix size");
  std::vector<double> dense(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const auto r = A.row(i);
    for (int j = 0; j < n; ++j) dense[static_cast<std::size_t>(i) * n + j] = r[j];
  }
  return sym_eigs(std::move(dense), n, K, tol);
}

// ---------------------------------------------------------------------------
// k-means

struct KMeansResult {
  std::vector<int> labels;      // 1..K, aligned with the input point order
  std::vector<double> centers;  // K x dim row-major
  double objective = 0;         // within-cluster sum of squared distances
};

namespace detail {

inline KMeansResult kmeans_single(const PointSet& pts, int K, SplitRng rng, int max_iters) {
  const int m = pts.size();
  const int dim = pts.dim;
  std::vector<double> centers(static_cast<std::size_t>(K) * dim, 0.0);
  auto center = [&](int c) {
    return std::span<double>(centers.data() + static_cast<std::size_t>(c) * dim,
                             static_cast<std::size_t>(dim));
  };

  // Distance-weighted (k-means++ style) seeding.
  std::vector<char> is_center(m, 0);
  std::vector<double> d2(m, 0.0);
  {
    const int first = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
    std::copy_n(pts.point(first).begin(), dim, center(0).begin());
    is_center[first] = 1;
    for (int i = 0; i < m; ++i) d2[i] = dist2(pts.point(i), center(0));
    for (int c = 1; c < K; ++c) {
      double total = 0;
      for (double w : d2) total += w;
      int pick = -1;
      if (total > 0) {
        const double r = rng.next_double() * total;
        double cum = 0;
        for (int i = 0; i < m; ++i) {
          cum += d2[i];
          if (cum > r) {
            pick = i;
            break;
          }
        }
        if (pick < 0) {  // fell off the end through rounding; take last positive mass
          for (int i = m - 1; i >= 0; --i)
            if (d2[i] > 0) {
              pick = i;
              break;
            }
        }
      }
      if (pick < 0) {  // all remaining points coincide with existing centers
        for (int i = 0; i < m; ++i)
          if (!is_center[i]) {
            pick = i;
            break;
          }
        if (pick < 0) pick = 0;
      }
      std::copy_n(pts.point(pick).begin(), dim, center(c).begin());
      is_center[pick] = 1;
      for (int i = 0; i < m; ++i) d2[i] = std::min(d2[i], dist2(pts.point(i), center(c)));
    }
  }

  std::vector<int> assign(m, -1);
  std::vector<int> counts(K, 0);
  double prev_objective = std::numeric_limits<double>::infinity();
  double objective = 0;

  for (int iter = 0; iter < max_iters; ++iter) {
    // Assignment step; ties break toward the lowest center index.
    bool changed = false;
    objective = 0;
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < m; ++i) {
      int best = 0;
      double bestd = dist2(pts.point(i), center(0));
      for (int c = 1; c < K; ++c) {
        const double dc = dist2(pts.point(i), center(c));
        if (dc < bestd) {
          bestd = dc;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
      ++counts[best];
      objective += bestd;
    }
    assert(objective <= prev_objective + 1e-9 * (1.0 + std::abs(prev_objective)));
    prev_objective = objective;
    (void)prev_objective;
    if (!changed && iter > 0) break;

    // Update step.
    std::fill(centers.begin(), centers.end(), 0.0);
    for (int i = 0; i < m; ++i) {
      auto c = center(assign[i]);
      const auto p = pts.point(i);
      for (int t = 0; t < dim; ++t) c[t] += p[t];
    }
    for (int c = 0; c < K; ++c) {
      if (counts[c] == 0) continue;
      auto cc = center(c);
      for (int t = 0; t < dim; ++t) cc[t] /= counts[c];
    }

    // Empty clusters: re-seed at the point farthest from its assigned center.
    std::vector<char> stolen(m, 0);
    for (int c = 0; c < K; ++c) {
      if (counts[c] != 0) continue;
      int far = -1;
      double fard = -1;
      for (int i = 0; i < m; ++i) {
        if (stolen[i]) continue;
        const double di = dist2(pts.point(i), center(assign[i]));
        if (di > fard) {
          fard = di;
          far = i;
        }
      }
      if (far >= 0) {
        std::copy_n(pts.point(far).begin(), dim, center(c).begin());
        stolen[far] = 1;
      }
    }
  }

  KMeansResult out;
  out.labels.resize(m);
  for (int i = 0; i < m; ++i) out.labels[i] = assign[i] + 1;
  out.centers = std::move(centers);
  out.objective = objective;
  return out;
}

}  // namespace detail

/// Seeded k-means over a point set: k-means++ style initialization, Lloyd
/// iterations, `restarts` independent runs merged by lowest objective (ties
/// to the lowest restart index). Deterministic given the seed.
inline KMeansResult kmeans_full(const PointSet& pts, int K, std::uint64_t seed,
                                int restarts = 10, int max_iters = 100) {
  pts.validate();
  const int m = pts.size();
  if (K < 1) throw std::invalid_argument("kmeans: K must be >= 1");
  if (m < K) throw std::invalid_argument("kmeans: fewer points than clusters");
  if (restarts < 1 || max_iters < 1)
    throw std::invalid_argument("kmeans: restarts and max_iters must be >= 1");

  KMeansResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult res =
        detail::kmeans_single(pts, K, SplitRng(derive_seed(seed, static_cast<std::uint64_t>(r))),
                              max_iters);
    if (res.objective < best.objective) best = std::move(res);
  }
  return best;
}

inline Membership kmeans(const PointSet& pts, int K, std::uint64_t seed, int restarts = 10,
                         int max_iters = 100) {
  KMeansResult res = kmeans_full(pts, K, seed, restarts, max_iters);
  return Membership(pts.ids, std::move(res.labels));
}

// ---------------------------------------------------------------------------
// Separation statistics

struct SeparationGap {
  double max_within = 0;
  double min_between = std::numeric_limits<double>::infinity();
};

/// Sup of within-community pairwise distances and inf of cross-community
/// distances. Conventions: no within pair -> 0, no between pair -> +inf.
inline SeparationGap pairwise_min_gap(const PointSet& pts, const Membership& labels) {
  const int m = pts.size();
  std::vector<int> lab(m);
  for (int i = 0; i < m; ++i) lab[i] = labels.label_of(pts.ids[i]);
  SeparationGap gap;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double d = std::sqrt(detail::dist2(pts.point(i), pts.point(j)));
      if (lab[i] == lab[j])
        gap.max_within = std::max(gap.max_within, d);
      else
        gap.min_between = std::min(gap.min_between, d);
    }
  }
  return gap;
}

}  // namespace splitclust
