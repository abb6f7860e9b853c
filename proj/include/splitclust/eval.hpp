#pragma once

// Permutation-minimized recovery error and the Monte Carlo experiment engine.
// Trials derive seeds as hash(master, alpha index, trial index), so results
// are bit-reproducible regardless of how trials are scheduled across threads.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "splitclust/assignment.hpp"
#include "splitclust/baseline.hpp"
#include "splitclust/errors.hpp"
#include "splitclust/model.hpp"
#include "splitclust/refine.hpp"
#include "splitclust/rng.hpp"

namespace splitclust {

// ---------------------------------------------------------------------------
// Recovery error

struct RecoveryReport {
  long long errors = 0;
  std::vector<int> best_permutation;  // label l of ghat maps to best_permutation[l-1]
  double error_rate = 0;
  bool exact = false;
};

namespace detail {

inline std::vector<double> confusion(const Membership& g, const Membership& ghat, int K) {
  if (g.ids() != ghat.ids())
    throw std::invalid_argument("recovery_error: memberships cover different node sets");
  std::vector<double> c(static_cast<std::size_t>(K) * K, 0.0);
  for (int p = 0; p < g.size(); ++p)
    c[static_cast<std::size_t>(ghat.label_at(p) - 1) * K + (g.label_at(p) - 1)] += 1.0;
  return c;
}

inline RecoveryReport report_from_assignment(const Membership& g, const Assignment& match) {
  RecoveryReport rep;
  rep.errors = g.size() - static_cast<long long>(std::llround(match.total));
  rep.best_permutation.resize(match.match.size());
  for (std::size_t l = 0; l < match.match.size(); ++l)
    rep.best_permutation[l] = match.match[l] + 1;
  rep.error_rate = g.size() > 0 ? static_cast<double>(rep.errors) / g.size() : 0.0;
  rep.exact = rep.errors == 0;
  return rep;
}

}  // namespace detail

/// Minimum disagreements over label permutations, by K! enumeration.
inline RecoveryReport recovery_error_bruteforce(const Membership& g, const Membership& ghat) {
  const int K = std::max({1, g.max_label(), ghat.max_label()});
  const std::vector<double> c = detail::confusion(g, ghat, K);
  return detail::report_from_assignment(g, detail::max_assignment_brute(c, K));
}

/// Same minimum via optimal assignment on the confusion matrix.
inline RecoveryReport recovery_error_assignment(const Membership& g, const Membership& ghat) {
  const int K = std::max({1, g.max_label(), ghat.max_label()});
  const std::vector<double> c = detail::confusion(g, ghat, K);
  return detail::report_from_assignment(g, detail::max_assignment(c, K));
}

/// Recovery errors of ghat as an estimate of g: the smallest number of
/// disagreements achievable by relabeling ghat. Brute force for K <= 8,
/// optimal assignment above.
inline RecoveryReport recovery_error(const Membership& g, const Membership& ghat) {
  const int K = std::max({1, g.max_label(), ghat.max_label()});
  return K <= 8 ? recovery_error_bruteforce(g, ghat) : recovery_error_assignment(g, ghat);
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct ExperimentSpec {
  int n = 0;
  int K = 0;
  std::vector<double> b0;           // K x K row-major, max entry 1
  std::vector<double> proportions;  // community proportions; empty = balanced
  bool dcbm = false;
  double psi_low = 0.5;             // psi ~ U[psi_low, 1], then per-community max -> 1
  std::vector<double> alphas;       // values of a in alpha = a * log(n) / n
  std::string method = "split";     // baseline | split | vfold | self
  int folds = 2;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string recoverer = "spectral";
  std::string subroutine = "mst";
  bool spherical = false;
  int threads = 1;                  // 0 = hardware concurrency
};

struct AlphaResult {
  double a = 0;
  double alpha = 0;
  std::string method;
  int trials = 0;
  int failed = 0;
  int exact_count = 0;
  double exact_freq = 0;
  double wilson_lo = 0;
  double wilson_hi = 0;
  double mean_err_rate = 0;
  double median_err_rate = 0;
  double wall_ms = 0;  // stays 0 unless timing collection is enabled
};

struct ExperimentResult {
  std::vector<AlphaResult> rows;
};

inline void validate(const ExperimentSpec& spec) {
  if (spec.n < 2) throw usage_error("experiment: n must be >= 2");
  if (spec.K < 1) throw usage_error("experiment: K must be >= 1");
  if (spec.b0.size() != static_cast<std::size_t>(spec.K) * spec.K)
    throw usage_error("experiment: B0 must be K x K");
  if (spec.trials < 1) throw usage_error("experiment: trials must be >= 1");
  if (!spec.proportions.empty() && spec.proportions.size() != static_cast<std::size_t>(spec.K))
    throw usage_error("experiment: proportions must have K entries");
  for (double a : spec.alphas) {
    if (!(a > 0)) throw usage_error("experiment: alpha scale values must be positive");
    if (a * std::log(static_cast<double>(spec.n)) / spec.n > 1.0)
      throw usage_error("experiment: alpha = a*log(n)/n exceeds 1");
  }
  if (spec.dcbm && !(spec.psi_low > 0 && spec.psi_low <= 1))
    throw usage_error("experiment: psi_low must lie in (0,1]");
  if (spec.method != "baseline" && spec.method != "split" && spec.method != "vfold" &&
      spec.method != "self")
    throw usage_error("experiment: unknown method '" + spec.method +
                      "' (expected baseline|split|vfold|self)");
  if (spec.method == "vfold" && spec.folds < 2)
    throw usage_error("experiment: vfold needs folds >= 2");
  if (!recoverer_registry().count(spec.recoverer))
    throw usage_error("experiment: unknown recoverer '" + spec.recoverer +
                      "' (expected spectral|spherical)");
  if (!subroutine_registry().count(spec.subroutine))
    throw usage_error("experiment: unknown subroutine '" + spec.subroutine +
                      "' (expected mst|kmeans)");
  if (spec.threads < 0) throw usage_error("experiment: threads must be >= 0");
}

// ---------------------------------------------------------------------------
// Trial engine

namespace detail {

struct TrialOutcome {
  bool ok = false;
  bool exact = false;
  double error_rate = 1.0;
};

/// Schedule-independent trial key.
inline std::uint64_t trial_seed(std::uint64_t master, int alpha_index, int trial_index) {
  return derive_seed(derive_seed(master, 0x5eedULL + alpha_index),
                     static_cast<std::uint64_t>(trial_index));
}

inline TrialOutcome run_trial(const ExperimentSpec& spec, const Membership& truth,
                              const RecovererFn& S, const ClusterFn& D, int alpha_index,
                              int trial_index) {
  TrialOutcome out;
  try {
    const double a = spec.alphas[alpha_index];
    const double alpha = a * std::log(static_cast<double>(spec.n)) / spec.n;
    const BlockConnectivity model(spec.K, spec.b0, alpha);
    const std::uint64_t key = trial_seed(spec.seed, alpha_index, trial_index);

    AdjacencyMatrix A = [&] {
      if (spec.dcbm) {
        const DegreeProfile psi =
            sample_degree_profile(spec.n, spec.psi_low, truth, spec.K, derive_seed(key, 1));
        return sample_dcbm(model, truth, psi, derive_seed(key, 2));
      }
      return sample_sbm(model, truth, derive_seed(key, 2));
    }();

    const std::uint64_t mseed = derive_seed(key, 3);
    Membership ghat = [&] {
      if (spec.method == "baseline") return S(A, spec.K, mseed);
      if (spec.method == "split") return split_clust(A, spec.K, S, D, mseed, spec.spherical);
      if (spec.method == "vfold")
        return vfold_clust(A, spec.K, spec.folds, S, D, mseed, spec.spherical);
      return self_cross_clust(A, spec.K, S, D, mseed, spec.spherical);
    }();

    const RecoveryReport rep = recovery_error(truth, ghat);
    out.ok = true;
    out.exact = rep.exact;
    out.error_rate = rep.error_rate;
  } catch (const std::exception&) {
    out.ok = false;
  }
  return out;
}

inline std::pair<double, double> wilson95(int successes, int n) {
  if (n <= 0) return {0.0, 0.0};
  const double z = 1.959963984540054;
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * static_cast<double>(n) * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline AlphaResult run_grid_point(const ExperimentSpec& spec, int alpha_index,
                                  bool collect_timing) {
  const Membership truth = [&] {
    if (!spec.proportions.empty()) return make_block_membership(spec.n, spec.proportions);
    const std::vector<double> balanced(spec.K, 1.0 / spec.K);
    return make_block_membership(spec.n, balanced);
  }();
  const RecovererFn S = recoverer_registry().at(spec.recoverer).fn;
  const ClusterFn& D = subroutine_registry().at(spec.subroutine);

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<TrialOutcome> outcomes(spec.trials);
  const int threads = spec.threads == 0
                          ? std::max(1u, std::thread::hardware_concurrency())
                          : spec.threads;
  if (threads <= 1 || spec.trials == 1) {
    for (int t = 0; t < spec.trials; ++t)
      outcomes[t] = run_trial(spec, truth, S, D, alpha_index, t);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= spec.trials) return;
        outcomes[t] = run_trial(spec, truth, S, D, alpha_index, t);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(threads, spec.trials); ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  const auto t1 = std::chrono::steady_clock::now();

  AlphaResult row;
  row.a = spec.alphas[alpha_index];
  row.alpha = row.a * std::log(static_cast<double>(spec.n)) / spec.n;
  row.method = spec.method;
  row.trials = spec.trials;
  std::vector<double> rates;
  for (const TrialOutcome& o : outcomes) {
    if (!o.ok) {
      ++row.failed;
      continue;
    }
    if (o.exact) ++row.exact_count;
    rates.push_back(o.error_rate);
  }
  const int completed = spec.trials - row.failed;
  row.exact_freq = completed > 0 ? static_cast<double>(row.exact_count) / completed : 0.0;
  const auto [lo, hi] = wilson95(row.exact_count, completed);
  row.wilson_lo = lo;
  row.wilson_hi = hi;
  if (!rates.empty()) {
    row.mean_err_rate = std::accumulate(rates.begin(), rates.end(), 0.0) / rates.size();
    std::sort(rates.begin(), rates.end());
    const std::size_t mid = rates.size() / 2;
    row.median_err_rate =
        rates.size() % 2 == 1 ? rates[mid] : 0.5 * (rates[mid - 1] + rates[mid]);
  }
  if (collect_timing)
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return row;
}

}  // namespace detail

/// Runs every (alpha, trial) cell of the experiment spec and aggregates
/// recovery statistics. Per-trial failures are counted, not fatal.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, bool collect_timing = false) {
  validate(spec);
  ExperimentResult result;
  for (int ai = 0; ai < static_cast<int>(spec.alphas.size()); ++ai)
    result.rows.push_back(detail::run_grid_point(spec, ai, collect_timing));
  return result;
}

struct SweepTable {
  std::vector<AlphaResult> rows;
  bool monotone_ok = true;  // no CI-signficant decrease of exact_freq in a
};

/// One run_experiment per grid point plus a monotone-trend diagnostic:
/// a decrease in exact-recovery frequency only counts as a violation when the
/// Wilson intervals of the two grid points are disjoint.
inline SweepTable phase_sweep(const ExperimentSpec& spec, bool collect_timing = false) {
  validate(spec);
  SweepTable table;
  for (int ai = 0; ai < static_cast<int>(spec.alphas.size()); ++ai)
    table.rows.push_back(detail::run_grid_point(spec, ai, collect_timing));

  std::vector<int> order(table.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return table.rows[x].a < table.rows[y].a; });
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const AlphaResult& lo = table.rows[order[i]];
    const AlphaResult& hi = table.rows[order[i + 1]];
    if (hi.exact_freq < lo.exact_freq && hi.wilson_hi < lo.wilson_lo)
      table.monotone_ok = false;
  }
  return table;
}

}  // namespace splitclust
