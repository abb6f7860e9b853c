#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "splitclust/baseline.hpp"
#include "splitclust/eval.hpp"
#include "support/helpers.hpp"

using namespace splitclust;

TEST_CASE("spectral clustering separates disconnected cliques", "[baseline]") {
  const AdjacencyMatrix A = testsup::two_cliques(10, 10);
  const Membership out = spectral_clustering(A, 2, 1);
  CHECK(recovery_error(testsup::two_clique_truth(10, 10), out).exact);
}

TEST_CASE("K = 1 labels everything 1", "[baseline]") {
  const AdjacencyMatrix A = testsup::two_cliques(4, 4);
  const Membership a = spectral_clustering(A, 1, 1);
  const Membership b = spherical_spectral_clustering(A, 1, 1);
  for (int lab : a.labels()) CHECK(lab == 1);
  for (int lab : b.labels()) CHECK(lab == 1);
}

TEST_CASE("registry exposes both strategies and they are total labelings", "[baseline]") {
  const AdjacencyMatrix A = testsup::two_cliques(6, 5);
  for (const auto& [name, fn] : recoverer_registry()) {
    const Membership m = fn(A, 2, 9);
    CHECK(m.size() == 11);
    for (int lab : m.labels()) {
      CHECK(lab >= 1);
      CHECK(lab <= 2);
    }
    CHECK((name == "spectral" || name == "spherical"));
  }
}

TEST_CASE("spherical clustering survives an all-zero adjacency", "[baseline]") {
  const Membership m = spherical_spectral_clustering(AdjacencyMatrix::zero(8), 2, 4);
  CHECK(m.size() == 8);
  for (int lab : m.labels()) {
    CHECK(lab >= 1);
    CHECK(lab <= 2);
  }
}

TEST_CASE("spherical clustering is exact on cliques with heterogeneous activeness",
          "[baseline][mc]") {
  // Disconnected two-block DCBM: B0 = I, psi in [0.5, 1].
  const int half = 30, n = 2 * half;
  const BlockConnectivity model(2, {1, 0, 0, 1}, 1.0);
  const Membership g = testsup::two_clique_truth(half, half);
  for (std::uint64_t t = 0; t < 5; ++t) {
    const DegreeProfile psi = sample_degree_profile(n, 0.5, g, 2, derive_seed(81, t));
    const AdjacencyMatrix A = sample_dcbm(model, g, psi, derive_seed(82, t));
    const Membership out = spherical_spectral_clustering(A, 2, derive_seed(83, t));
    CHECK(recovery_error(g, out).exact);
  }
}

TEST_CASE("spectral recovery error is small at a = 20 and shrinks with a",
          "[baseline][mc]") {
  const int n = 600, trials = 50;
  std::vector<double> props = {0.5, 0.5};
  const Membership g = make_block_membership(n, props);

  auto run = [&](double a, std::uint64_t salt) {
    const double alpha = a * std::log(static_cast<double>(n)) / n;
    const BlockConnectivity model(2, testsup::desk_b0(), alpha);
    std::vector<double> rates(trials);
    testsup::parallel_trials(trials, [&](int t) {
      const AdjacencyMatrix A = sample_sbm(model, g, derive_seed(salt, t));
      const Membership out = spectral_clustering(A, 2, derive_seed(salt + 1, t));
      rates[t] = recovery_error(g, out).error_rate;
    });
    std::sort(rates.begin(), rates.end());
    return rates;
  };

  const std::vector<double> at20 = run(20.0, 7000);
  int within5 = 0;
  for (double r : at20)
    if (r <= 0.05) ++within5;
  CHECK(within5 >= 45);  // error <= 5% in >= 90% of trials

  const std::vector<double> at40 = run(40.0, 7100);
  const double median20 = at20[trials / 2];
  const double median40 = at40[trials / 2];
  CHECK(median40 <= median20);
}

TEST_CASE("spherical matches spectral quality when psi is constant", "[baseline][mc]") {
  const int n = 600, trials = 20;
  const double alpha = 20.0 * std::log(static_cast<double>(n)) / n;
  const BlockConnectivity model(2, testsup::desk_b0(), alpha);
  std::vector<double> props = {0.5, 0.5};
  const Membership g = make_block_membership(n, props);
  std::vector<char> small(trials, 0);
  testsup::parallel_trials(trials, [&](int t) {
    const AdjacencyMatrix A = sample_sbm(model, g, derive_seed(7200, t));
    const double e1 = recovery_error(g, spectral_clustering(A, 2, derive_seed(7300, t))).error_rate;
    const double e2 =
        recovery_error(g, spherical_spectral_clustering(A, 2, derive_seed(7300, t))).error_rate;
    small[t] = (e1 <= 0.05 && e2 <= 0.05) ? 1 : 0;
  });
  const int both_small = std::accumulate(small.begin(), small.end(), 0);
  CHECK(both_small >= 18);  // >= 90%
}
