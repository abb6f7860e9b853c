// Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
// Tolerances and thresholds are pinned here, in code.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "splitclust/splitclust.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace splitclust;

namespace {

constexpr std::uint64_t kMasterSeed = 20260811;

void report(int criterion, const std::string& what, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << what
            << " — " << detail << std::endl;
  CHECK(pass);
}

ExperimentSpec sbm_desk(double a, int trials, std::uint64_t seed) {
  ExperimentSpec spec;
  spec.n = 800;
  spec.K = 2;
  spec.b0 = testsup::desk_b0();
  spec.alphas = {a};
  spec.method = "split";
  spec.trials = trials;
  spec.seed = seed;
  spec.threads = 2;
  return spec;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace

TEST_CASE("criterion 1: exact recovery at a=30 via sample splitting", "[acceptance]") {
  const ExperimentSpec spec = sbm_desk(30.0, 50, derive_seed(kMasterSeed, 1));
  const AlphaResult row = run_experiment(spec).rows.at(0);
  report(1, "SplitClust exact-recovery frequency >= 0.90 at n=800, a=30",
         row.exact_freq >= 0.90 && row.failed == 0,
         "exact " + std::to_string(row.exact_count) + "/50, freq " + fmt(row.exact_freq));
}

TEST_CASE("criterion 2: sub-threshold sanity at a=0.2", "[acceptance]") {
  const ExperimentSpec spec = sbm_desk(0.2, 50, derive_seed(kMasterSeed, 2));
  const AlphaResult row = run_experiment(spec).rows.at(0);
  report(2, "exact-recovery frequency < 0.50 at a=0.2", row.exact_freq < 0.50,
         "exact " + std::to_string(row.exact_count) + "/50, freq " + fmt(row.exact_freq));
}

TEST_CASE("criterion 3: DCBM exact recovery via the spherical pipeline", "[acceptance]") {
  ExperimentSpec spec = sbm_desk(40.0, 50, derive_seed(kMasterSeed, 3));
  spec.dcbm = true;
  spec.psi_low = 0.5;
  spec.recoverer = "spherical";
  spec.spherical = true;
  const AlphaResult row = run_experiment(spec).rows.at(0);
  report(3, "spherical SplitClust exact-recovery frequency >= 0.85 at n=800, a=40",
         row.exact_freq >= 0.85 && row.failed == 0,
         "exact " + std::to_string(row.exact_count) + "/50, freq " + fmt(row.exact_freq));
}

TEST_CASE("criterion 4: separation implies exact cross clustering", "[acceptance]") {
  long long triggered = 0, violations = 0, passes = 0;

  auto audit = [&](const CrossTrace& ct, const Membership& truth) {
    ++passes;
    const Membership fed_truth = testsup::restrict_truth(truth, ct.fed_points.ids);
    const SeparationGap gap = pairwise_min_gap(ct.fed_points, fed_truth);
    if (gap.max_within < gap.min_between) {
      ++triggered;
      if (!recovery_error(fed_truth, ct.d_labels).exact) ++violations;
    }
  };

  // SBM desk trials.
  {
    const int n = 800;
    const double alpha = 30.0 * std::log(static_cast<double>(n)) / n;
    const BlockConnectivity model(2, testsup::desk_b0(), alpha);
    std::vector<double> props = {0.5, 0.5};
    const Membership g = make_block_membership(n, props);
    for (int t = 0; t < 50; ++t) {
      const AdjacencyMatrix A = sample_sbm(model, g, derive_seed(kMasterSeed, 400 + t));
      const SplitClustTrace tr =
          split_clust_traced(A, 2, recoverer_registry().at("spectral"), mst_subroutine(),
                             derive_seed(kMasterSeed, 500 + t));
      audit(tr.step3, g);
      audit(tr.step4, g);
    }
  }
  // DCBM spherical trials.
  {
    const int n = 800;
    const double alpha = 40.0 * std::log(static_cast<double>(n)) / n;
    const BlockConnectivity model(2, testsup::desk_b0(), alpha);
    std::vector<double> props = {0.5, 0.5};
    const Membership g = make_block_membership(n, props);
    for (int t = 0; t < 50; ++t) {
      const DegreeProfile psi = sample_degree_profile(n, 0.5, g, 2, derive_seed(kMasterSeed, 600 + t));
      const AdjacencyMatrix A = sample_dcbm(model, g, psi, derive_seed(kMasterSeed, 700 + t));
      const SplitClustTrace tr =
          split_clust_traced(A, 2, recoverer_registry().at("spherical"), mst_subroutine(),
                             derive_seed(kMasterSeed, 800 + t), true);
      audit(tr.step3, g);
      audit(tr.step4, g);
    }
  }
  // Disconnected cliques: the separation condition genuinely triggers here.
  {
    const AdjacencyMatrix A = testsup::two_cliques(12, 12);
    const Membership g = testsup::two_clique_truth(12, 12);
    for (int t = 0; t < 20; ++t) {
      const SplitClustTrace tr =
          split_clust_traced(A, 2, recoverer_registry().at("spectral"), mst_subroutine(),
                             derive_seed(kMasterSeed, 900 + t));
      audit(tr.step3, g);
      audit(tr.step4, g);
    }
  }

  report(4, "whenever max_within < min_between, the cross pass is exact", violations == 0,
         "condition held in " + std::to_string(triggered) + "/" + std::to_string(passes) +
             " passes, violations " + std::to_string(violations));
  CHECK(triggered > 0);  // the audit must not be vacuous
}

TEST_CASE("criterion 5: embedding concentration tightens with n", "[acceptance]") {
  const double a = 30.0;
  std::vector<double> mean_max;
  for (const int n : {400, 800, 1600}) {
    const double alpha = a * std::log(static_cast<double>(n)) / n;
    const BlockConnectivity model(2, testsup::desk_b0(), alpha);
    std::vector<double> props = {0.5, 0.5};
    const Membership g = make_block_membership(n, props);
    double acc = 0;
    for (int t = 0; t < 30; ++t) {
      const AdjacencyMatrix A = sample_sbm(model, g, derive_seed(kMasterSeed, 1000 + 64 * n + t));
      const SplitPlan plan = split_nodes(n, derive_seed(kMasterSeed, 2000 + 64 * n + t));
      const Membership g1 = testsup::restrict_truth(g, plan.v1);
      double mx = 0;
      for (const NodeEmbedding& e : cross_embed(A, plan.v1, plan.v2, g1, 2)) {
        double d2 = 0;
        for (int k = 0; k < 2; ++k) {
          const double diff = e.h[k] - model.edge_prob(g.label_of(e.node) - 1, k);
          d2 += diff * diff;
        }
        mx = std::max(mx, std::sqrt(d2));
      }
      acc += mx;
    }
    mean_max.push_back(acc / 30.0);
  }
  const double ratio = mean_max[2] / mean_max[0];
  const bool decreasing = mean_max[0] > mean_max[1] && mean_max[1] > mean_max[2];
  report(5, "max ||h_v - B(g_v,.)|| decreases with n; 1600/400 ratio in [0.3, 0.9]",
         decreasing && ratio >= 0.3 && ratio <= 0.9,
         "means " + fmt(mean_max[0]) + " > " + fmt(mean_max[1]) + " > " + fmt(mean_max[2]) +
             ", ratio " + fmt(ratio));
}

TEST_CASE("criterion 6: random splits keep memberships proper", "[acceptance]") {
  const int n = 300;
  std::vector<int> labels(n, 2);
  for (int i = 0; i < 90; ++i) labels[i] = 1;  // exactly 0.3-proper
  const Membership g = Membership::dense(labels);
  REQUIRE(is_proper(g, 0.3, n, 2));

  const double pi_third = 0.3 / 3.0;
  int good = 0;
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    const SplitPlan plan = split_nodes(n, derive_seed(kMasterSeed, 3000 + r));
    const bool ok1 = is_proper(testsup::restrict_truth(g, plan.v1), pi_third, n, 2);
    const bool ok2 = is_proper(testsup::restrict_truth(g, plan.v2), pi_third, n, 2);
    if (ok1 && ok2) ++good;
  }
  report(6, "both halves are pi0/3-proper in >= 99% of 10,000 splits", good >= 9900,
         std::to_string(good) + "/10000 proper");
}

TEST_CASE("criterion 7: normalized rows of B~ stay psi0*gamma_tilde apart", "[acceptance]") {
  SplitRng rng(derive_seed(kMasterSeed, 7));
  const double psi0 = 0.4;
  int violations = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    // Random symmetric B0 with max entry 1 and gamma-tilde >= 0.3.
    int K = 0;
    std::vector<double> b0;
    double gamma_tilde = 0;
    for (;;) {
      K = 2 + static_cast<int>(rng.below(3));
      b0.assign(static_cast<std::size_t>(K) * K, 0.0);
      double mx = 0;
      for (int i = 0; i < K; ++i)
        for (int j = i; j < K; ++j) {
          const double x = rng.next_double();
          b0[static_cast<std::size_t>(i) * K + j] = x;
          b0[static_cast<std::size_t>(j) * K + i] = x;
          mx = std::max(mx, x);
        }
      for (double& x : b0) x /= mx;
      const BlockConnectivity probe(K, b0, 1.0);
      const Membership dummy = Membership::dense(std::vector<int>(K, 1));
      const AssumptionReport rep = check_assumptions(probe, dummy);
      if (!rep.zero_row_violation && rep.gamma_tilde_achieved &&
          *rep.gamma_tilde_achieved >= 0.3) {
        gamma_tilde = *rep.gamma_tilde_achieved;
        break;
      }
    }
    const BlockConnectivity model(K, b0, 1.0);

    // Random community sizes and psi values with floor psi0.
    std::vector<int> ids, labels;
    std::vector<double> psi_vals;
    int next_id = 0;
    for (int k = 1; k <= K; ++k) {
      const int sz = 3 + static_cast<int>(rng.below(28));
      for (int i = 0; i < sz; ++i) {
        ids.push_back(next_id++);
        labels.push_back(k);
        psi_vals.push_back(psi0 + (1.0 - psi0) * rng.next_double());
      }
    }
    const Membership g1(ids, labels);
    const DegreeProfile psi(psi_vals);
    const std::vector<double> bt = weighted_connectivity(model, psi, g1, K);

    double min_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K; ++i) {
      for (int j = i + 1; j < K; ++j) {
        double ni = 0, nj = 0, dot = 0;
        for (int t = 0; t < K; ++t) {
          const double x = bt[static_cast<std::size_t>(i) * K + t];
          const double y = bt[static_cast<std::size_t>(j) * K + t];
          ni += x * x;
          nj += y * y;
          dot += x * y;
        }
        double d2 = 2.0 - 2.0 * dot / std::sqrt(ni * nj);
        min_dist = std::min(min_dist, std::sqrt(std::max(0.0, d2)));
      }
    }
    if (min_dist < psi0 * gamma_tilde - 1e-12) ++violations;
  }
  report(7, "min normalized-row distance of B~ >= psi0 * gamma_tilde over 1000 draws",
         violations == 0, std::to_string(violations) + " violations");
}

TEST_CASE("criterion 8: oracle equivalences", "[acceptance]") {
  // (a) assignment-based recovery error equals K! brute force.
  {
    SplitRng rng(derive_seed(kMasterSeed, 80));
    int mismatches = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const int K = 2 + static_cast<int>(rng.below(5));  // 2..6
      const int n = K + static_cast<int>(rng.below(static_cast<std::uint64_t>(40 - K)));
      std::vector<int> la(n), lb(n);
      for (int i = 0; i < n; ++i) {
        la[i] = (i < K) ? i + 1 : 1 + static_cast<int>(rng.below(K));
        lb[i] = (i < K) ? i + 1 : 1 + static_cast<int>(rng.below(K));
      }
      const Membership g = Membership::dense(la), h = Membership::dense(lb);
      if (recovery_error_bruteforce(g, h).errors != recovery_error_assignment(g, h).errors)
        ++mismatches;
    }
    report(8, "recovery_error assignment == brute force on 500 instances", mismatches == 0,
           std::to_string(mismatches) + " discrepancies");
  }
  // (b) eigensolver vs independent Jacobi decomposition.
  {
    SplitRng rng(derive_seed(kMasterSeed, 81));
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 4 + static_cast<int>(rng.below(9));  // 4..12
      std::vector<double> a;
      if (trial % 4 == 0) {  // binary symmetric zero-diagonal (adjacency-like)
        a.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j) {
            const double x = rng.bernoulli(0.4) ? 1.0 : 0.0;
            a[static_cast<std::size_t>(i) * n + j] = x;
            a[static_cast<std::size_t>(j) * n + i] = x;
          }
      } else {
        a = testsup::random_symmetric(n, rng);
      }
      const EigenPairs mine = sym_eigs(a, n, n);
      const oracle::FullEigs ref = oracle::jacobi_eigs(a, n);
      // Compare spectra as multisets: |value| ordering is unstable when a
      // +/- pair has equal magnitude (common for binary matrices).
      std::vector<double> va = mine.values, vb = ref.values;
      std::sort(va.begin(), va.end());
      std::sort(vb.begin(), vb.end());
      for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(va[j] - vb[j]));
    }
    report(8, "top_k_eigs matches full Jacobi decomposition within 1e-8 on 200 matrices",
           worst <= 1e-8, "worst |value diff| " + fmt(worst));
  }
  // (c) kmeans vs exhaustive optimal partition.
  {
    SplitRng rng(derive_seed(kMasterSeed, 82));
    int suboptimal = 0;
    for (int trial = 0; trial < 50; ++trial) {
      PointSet ps;
      ps.dim = 2;
      const double centers[3][2] = {{0, 0}, {5, 0}, {0, 5}};
      for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 4; ++i) {
          ps.ids.push_back(b * 4 + i);
          for (int t = 0; t < 2; ++t)
            ps.coords.push_back(centers[b][t] + 0.1 * (2 * rng.next_double() - 1));
        }
      const KMeansResult mine = kmeans_full(ps, 3, derive_seed(kMasterSeed, 8300 + trial));
      const oracle::BestPartition best = oracle::exhaustive_kmeans(ps, 3);
      const bool same_objective = std::abs(mine.objective - best.objective) <=
                                  1e-9 * (1.0 + best.objective);
      const bool same_partition =
          recovery_error(Membership(ps.ids, best.labels), Membership(ps.ids, mine.labels))
              .exact;
      if (!(same_objective && same_partition)) ++suboptimal;
    }
    report(8, "kmeans equals the exhaustive optimal partition on 50 instances",
           suboptimal == 0, std::to_string(suboptimal) + " suboptimal runs");
  }
}

TEST_CASE("criterion 9: CLI runs are byte-identical given a seed", "[acceptance]") {
  const std::string cli = testsup::cli_path();
  if (cli.empty()) {
    report(9, "CLI determinism", false, "SPLITCLUST_CLI not set");
    return;
  }
  const std::string dir = testsup::fresh_dir("acceptance_cli");
  bool ok = true;
  std::string detail;

  auto expect_equal = [&](const std::string& a, const std::string& b, const std::string& tag) {
    const std::string ca = testsup::slurp(dir + "/" + a);
    const std::string cb = testsup::slurp(dir + "/" + b);
    if (ca.empty() || ca != cb) {
      ok = false;
      detail += tag + " differs; ";
    }
  };

  // generate (SBM and DCBM) twice with one seed.
  REQUIRE(testsup::run_cli("--seed 11 generate --n 120 -k 2 --alpha-scale 10 --out a1", dir)
              .exit_code == 0);
  REQUIRE(testsup::run_cli("--seed 11 generate --n 120 -k 2 --alpha-scale 10 --out a2", dir)
              .exit_code == 0);
  expect_equal("a1.edges", "a2.edges", "generate edges");
  expect_equal("a1.labels", "a2.labels", "generate labels");
  REQUIRE(testsup::run_cli(
              "--seed 12 generate --n 120 -k 2 --alpha-scale 10 --model dcbm --out b1", dir)
              .exit_code == 0);
  REQUIRE(testsup::run_cli(
              "--seed 12 generate --n 120 -k 2 --alpha-scale 10 --model dcbm --out b2", dir)
              .exit_code == 0);
  expect_equal("b1.edges", "b2.edges", "dcbm edges");
  expect_equal("b1.psi", "b2.psi", "dcbm psi");

  // recover twice with one seed.
  REQUIRE(testsup::run_cli(
              "--seed 13 recover a1.edges -k 2 --method split --truth a1.labels --out r1", dir)
              .exit_code == 0);
  REQUIRE(testsup::run_cli(
              "--seed 13 recover a1.edges -k 2 --method split --truth a1.labels --out r2", dir)
              .exit_code == 0);
  expect_equal("r1.labels", "r2.labels", "recover labels");
  expect_equal("r1.report", "r2.report", "recover report");

  // bench under different thread counts.
  std::ofstream(dir + "/bench.cfg") << "n = 200\nk = 2\nb0 = 1,0.3;0.3,1\nalphas = 8\n"
                                    << "trials = 4\nmethod = split\nseed = 14\nout = t1.csv\n";
  REQUIRE(testsup::run_cli("bench bench.cfg --threads 1 -o t1.csv", dir).exit_code == 0);
  REQUIRE(testsup::run_cli("bench bench.cfg --threads 2 -o t2.csv", dir).exit_code == 0);
  expect_equal("t1.csv", "t2.csv", "bench across --threads");

  // sanity: a different seed changes the output.
  REQUIRE(testsup::run_cli("--seed 99 generate --n 120 -k 2 --alpha-scale 10 --out c1", dir)
              .exit_code == 0);
  if (testsup::slurp(dir + "/a1.edges") == testsup::slurp(dir + "/c1.edges")) {
    ok = false;
    detail += "different seeds gave identical output; ";
  }

  report(9, "generate/recover/bench outputs byte-identical under matched seeds", ok,
         detail.empty() ? "all byte-identical, seeds distinguish" : detail);
}

TEST_CASE("criterion 10: political blogs (optional external data)", "[acceptance]") {
  const char* edges_env = std::getenv("SPLITCLUST_POLBLOGS");
  const char* labels_env = std::getenv("SPLITCLUST_POLBLOGS_LABELS");
  if (edges_env == nullptr || labels_env == nullptr) {
    std::cout << "[SKIP] criterion 10: political blogs data not supplied "
                 "(set SPLITCLUST_POLBLOGS and SPLITCLUST_POLBLOGS_LABELS)"
              << std::endl;
    SKIP("political blogs data not supplied");
  }
  const LoadedGraph graph = load_edge_list(edges_env, "tsv");
  const Membership truth = load_membership(labels_env, "tsv", &graph.index_to_id);
  const Membership base = spherical_spectral_clustering(graph.A, 2, 1);
  const Membership self = self_cross_clust(graph.A, 2, recoverer_registry().at("spherical"),
                                           mst_subroutine(), 1, true);
  const long long be = recovery_error(truth, base).errors;
  const long long se = recovery_error(truth, self).errors;
  report(10, "self-cross misclassifies <= 0.95x the spherical baseline",
         static_cast<double>(se) <= 0.95 * static_cast<double>(be),
         "self " + std::to_string(se) + " vs baseline " + std::to_string(be));
}
