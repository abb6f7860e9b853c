#pragma once

// Maximum-weight perfect assignment on square matrices. Two routes: K!
// enumeration for small K and the O(K^3) potentials (Hungarian) algorithm.
// Both return the column matched to each row plus the achieved total.

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace splitclust::detail {

struct Assignment {
  std::vector<int> match;  // match[row] = column, 0-based
  double total = 0;
};

/// Exhaustive search over all K! permutations. Intended for K <= 10.
inline Assignment max_assignment_brute(const std::vector<double>& w, int K) {
  if (K < 1 || w.size() != static_cast<std::size_t>(K) * K)
    throw std::invalid_argument("max_assignment_brute: bad matrix");
  if (K > 10) throw std::invalid_argument("max_assignment_brute: K too large for enumeration");
  std::vector<int> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  Assignment best;
  best.total = -std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (int r = 0; r < K; ++r) total += w[static_cast<std::size_t>(r) * K + perm[r]];
    if (total > best.total) {
      best.total = total;
      best.match = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Hungarian algorithm with row/column potentials, minimizing cost; we feed
/// it negated weights to maximize.
inline Assignment max_assignment(const std::vector<double>& w, int K) {
  if (K < 1 || w.size() != static_cast<std::size_t>(K) * K)
    throw std::invalid_argument("max_assignment: bad matrix");
  const double inf = std::numeric_limits<double>::infinity();
  auto cost = [&](int r, int c) { return -w[static_cast<std::size_t>(r) * K + c]; };

  // 1-based arrays; p[j] holds the row assigned to column j.
  std::vector<double> u(K + 1, 0), v(K + 1, 0);
  std::vector<int> p(K + 1, 0), way(K + 1, 0);
  for (int i = 1; i <= K; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(K + 1, inf);
    std::vector<char> used(K + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= K; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= K; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.match.assign(K, -1);
  for (int j = 1; j <= K; ++j)
    if (p[j] != 0) out.match[p[j] - 1] = j - 1;
  for (int r = 0; r < K; ++r) out.total += w[static_cast<std::size_t>(r) * K + out.match[r]];
  return out;
}

}  // namespace splitclust::detail
