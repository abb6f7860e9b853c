#pragma once

// Shared fixtures for the test suites.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "splitclust/splitclust.hpp"

namespace testsup {

/// Runs fn(t) for t in [0, trials) across hardware threads. Each trial must
/// be independent and write only its own slot of any shared output.
inline void parallel_trials(int trials, const std::function<void(int)>& fn) {
  const unsigned workers = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                              static_cast<unsigned>(trials));
  if (workers <= 1) {
    for (int t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= trials) return;
        fn(t);
      }
    });
  for (auto& th : pool) th.join();
}

/// Two disjoint cliques of sizes a and b; nodes 0..a-1 form community 1.
inline splitclust::AdjacencyMatrix two_cliques(int a, int b) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < a; ++i)
    for (int j = i + 1; j < a; ++j) edges.emplace_back(i, j);
  for (int i = a; i < a + b; ++i)
    for (int j = i + 1; j < a + b; ++j) edges.emplace_back(i, j);
  return splitclust::AdjacencyMatrix::from_edges(a + b, edges);
}

inline splitclust::Membership two_clique_truth(int a, int b) {
  std::vector<int> labels(a + b, 1);
  for (int i = a; i < a + b; ++i) labels[i] = 2;
  return splitclust::Membership::dense(std::move(labels));
}

/// Truth labels restricted to a node subset.
inline splitclust::Membership restrict_truth(const splitclust::Membership& g,
                                             const std::vector<int>& ids) {
  std::vector<int> labels;
  labels.reserve(ids.size());
  for (int v : ids) labels.push_back(g.label_of(v));
  return splitclust::Membership(ids, std::move(labels));
}

inline std::vector<double> random_symmetric(int n, splitclust::SplitRng& rng) {
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double x = 2.0 * rng.next_double() - 1.0;
      a[static_cast<std::size_t>(i) * n + j] = x;
      a[static_cast<std::size_t>(j) * n + i] = x;
    }
  return a;
}

/// The K=2 desk model used throughout: B0 = [[1, 0.3], [0.3, 1]].
inline std::vector<double> desk_b0() { return {1.0, 0.3, 0.3, 1.0}; }

inline splitclust::ExperimentSpec desk_spec(int n, double a, const std::string& method,
                                            int trials, std::uint64_t seed) {
  splitclust::ExperimentSpec spec;
  spec.n = n;
  spec.K = 2;
  spec.b0 = desk_b0();
  spec.alphas = {a};
  spec.method = method;
  spec.trials = trials;
  spec.seed = seed;
  spec.threads = 2;
  return spec;
}

// ---------------------------------------------------------------------------
// CLI harness

inline std::string cli_path() {
  const char* p = std::getenv("SPLITCLUST_CLI");
  return p ? p : "";
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

/// Runs the CLI with the given argument string; captures stdout+stderr.
inline CliResult run_cli(const std::string& args, const std::string& workdir) {
  CliResult res;
  const std::string out_file = workdir + "/cli_output.txt";
  const std::string cmd = "cd '" + workdir + "' && '" + cli_path() + "' " + args + " > '" +
                          out_file + "' 2>&1";
  const int rc = std::system(cmd.c_str());
  res.exit_code = (rc >= 256) ? rc / 256 : rc;  // WEXITSTATUS without <sys/wait.h>
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  res.output = ss.str();
  return res;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fresh_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("splitclust_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace testsup
