// Command-line frontend: generate block-model graphs, recover communities,
// run Monte Carlo benchmarks, and audit model assumptions.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splitclust/splitclust.hpp"

namespace {

using namespace splitclust;

struct ModelFlags {
  int n = 0;
  int K = 2;
  std::string b0_text = "1,0.3;0.3,1";
  std::string proportions_text;
  std::string model = "sbm";
  double psi_low = 0.5;
  double alpha = -1;        // absolute edge-density scale
  double alpha_scale = -1;  // a in alpha = a*log(n)/n
};

double resolve_alpha(const ModelFlags& mf) {
  if ((mf.alpha >= 0) == (mf.alpha_scale >= 0))
    throw usage_error("specify exactly one of --alpha or --alpha-scale");
  if (mf.alpha >= 0) return mf.alpha;
  return mf.alpha_scale * std::log(static_cast<double>(mf.n)) / mf.n;
}

Membership membership_from_flags(const ModelFlags& mf) {
  std::vector<double> props;
  if (mf.proportions_text.empty())
    props.assign(mf.K, 1.0 / mf.K);
  else
    props = parse_double_list(mf.proportions_text, "proportions");
  if (static_cast<int>(props.size()) != mf.K)
    throw usage_error("proportions must have K entries");
  return make_block_membership(mf.n, props);
}

int cmd_generate(const ModelFlags& mf, std::uint64_t seed, const std::string& format,
                 const std::string& out_prefix) {
  const std::vector<double> b0 = parse_matrix(mf.b0_text, "b0");
  if (b0.size() != static_cast<std::size_t>(mf.K) * mf.K)
    throw usage_error("b0 must be a K x K matrix");
  if (mf.n < 1) throw usage_error("--n must be >= 1");
  const BlockConnectivity model(mf.K, b0, resolve_alpha(mf));
  const Membership g = membership_from_flags(mf);

  AdjacencyMatrix A = AdjacencyMatrix::zero(0);
  if (mf.model == "sbm") {
    A = sample_sbm(model, g, derive_seed(seed, 11));
  } else if (mf.model == "dcbm") {
    const DegreeProfile psi =
        sample_degree_profile(mf.n, mf.psi_low, g, mf.K, derive_seed(seed, 12));
    A = sample_dcbm(model, g, psi, derive_seed(seed, 11));
    std::ofstream pf(out_prefix + ".psi");
    if (!pf) throw data_error("cannot write " + out_prefix + ".psi");
    pf << "# splitclust " << kVersion << " psi seed=" << seed << "\n";
    for (int i = 0; i < mf.n; ++i) pf << i << '\t' << detail::fmt_double(psi.at(i)) << "\n";
  } else {
    throw usage_error("unknown model '" + mf.model + "' (expected sbm|dcbm)");
  }

  write_edge_list(out_prefix + ".edges", A, format, seed);
  write_membership(out_prefix + ".labels", g, format, seed);
  std::cout << "wrote " << out_prefix << ".edges (" << A.size() << " nodes, " << A.edge_count()
            << " edges) and " << out_prefix << ".labels\n";
  return 0;
}

int cmd_recover(const std::string& graph_path, int K, const std::string& method, int folds,
                const std::string& recoverer, const std::string& subroutine, bool spherical,
                std::uint64_t seed, const std::string& truth_path, const std::string& format,
                const std::string& out_prefix) {
  if (K < 1) throw usage_error("--communities must be >= 1");
  auto rit = recoverer_registry().find(recoverer);
  if (rit == recoverer_registry().end()) {
    std::string options;
    for (const auto& [name, entry] : recoverer_registry())
      options += (options.empty() ? "" : ", ") + name + " (for " + entry.intended_model + ")";
    throw usage_error("unknown recoverer '" + recoverer + "' (options: " + options + ")");
  }
  auto sit = subroutine_registry().find(subroutine);
  if (sit == subroutine_registry().end())
    throw usage_error("unknown subroutine '" + subroutine + "' (options: mst, kmeans)");

  const LoadedGraph graph = load_edge_list(graph_path, format);
  if (graph.dropped_self_loops > 0)
    std::cerr << "warning: dropped " << graph.dropped_self_loops << " self-loop(s)\n";

  Membership ghat = [&] {
    const std::uint64_t mseed = derive_seed(seed, 21);
    if (method == "baseline") return rit->second(graph.A, K, mseed);
    if (method == "split")
      return split_clust(graph.A, K, rit->second, sit->second, mseed, spherical);
    if (method == "vfold")
      return vfold_clust(graph.A, K, folds, rit->second, sit->second, mseed, spherical);
    if (method == "self")
      return self_cross_clust(graph.A, K, rit->second, sit->second, mseed, spherical);
    throw usage_error("unknown method '" + method + "' (options: baseline, split, vfold, self)");
  }();

  write_membership(out_prefix + ".labels", ghat, format, seed, &graph.index_to_id);
  std::cout << "wrote " << out_prefix << ".labels\n";

  if (!truth_path.empty()) {
    const Membership truth = load_membership(truth_path, format, &graph.index_to_id);
    const RecoveryReport rep = recovery_error(truth, ghat);
    write_report(out_prefix + ".report", rep, format, seed);
    std::cout << "errors=" << rep.errors << " error_rate="
              << detail::fmt_double(rep.error_rate, "%.6f")
              << " exact=" << (rep.exact ? "true" : "false") << "\n";
  }
  return 0;
}

int cmd_bench(const std::string& config_path, std::optional<int> threads,
              std::optional<std::uint64_t> seed, const std::string& out_override, bool timings) {
  BenchConfig cfg = parse_bench_config(config_path);
  if (threads) cfg.spec.threads = *threads;
  if (seed) cfg.spec.seed = *seed;
  if (!out_override.empty()) cfg.out = out_override;

  const SweepTable table = phase_sweep(cfg.spec, timings);
  write_results(cfg.out, table.rows, cfg.format, cfg.spec.seed);
  std::cout << "wrote " << cfg.out << " (" << table.rows.size() << " row(s))\n";
  if (!table.monotone_ok)
    std::cout << "note: exact-recovery frequency is not monotone in a beyond CI overlap\n";
  for (const AlphaResult& r : table.rows)
    std::cout << "a=" << detail::fmt_double(r.a) << " exact_freq="
              << detail::fmt_double(r.exact_freq, "%.3f") << " mean_err="
              << detail::fmt_double(r.mean_err_rate, "%.4f") << (r.failed ? " (failures)" : "")
              << "\n";
  return 0;
}

int cmd_inspect(const std::string& b0_text, double alpha, const std::string& truth_path,
                const std::string& psi_path, const std::string& format) {
  const std::vector<double> b0 = parse_matrix(b0_text, "b0");
  const int K = static_cast<int>(std::lround(std::sqrt(static_cast<double>(b0.size()))));
  const BlockConnectivity model(K, b0, alpha);

  Membership g = Membership::dense(std::vector<int>(static_cast<std::size_t>(K), 1));
  bool have_truth = false;
  if (!truth_path.empty()) {
    g = load_membership(truth_path, format);
    have_truth = true;
  }
  std::optional<DegreeProfile> psi;
  if (!psi_path.empty()) {
    std::ifstream in(psi_path);
    if (!in) throw data_error("cannot open psi file: " + psi_path);
    std::vector<double> vals;
    std::string line;
    while (std::getline(in, line)) {
      const std::string body = detail::trim(line);
      if (body.empty() || body[0] == '#') continue;
      const auto f = detail::split_fields(body, false);
      vals.push_back(detail::parse_double_or(f.back(), "psi"));
    }
    psi.emplace(std::move(vals));
  }

  const AssumptionReport rep = check_assumptions(model, g, psi ? &*psi : nullptr);
  std::cout << "K=" << K << " alpha=" << detail::fmt_double(model.alpha()) << "\n";
  std::cout << "gamma_achieved=" << detail::fmt_double(rep.gamma_achieved) << "\n";
  if (rep.zero_row_violation)
    std::cout << "gamma_tilde_achieved=undefined (B0 has an all-zero row)\n";
  else
    std::cout << "gamma_tilde_achieved=" << detail::fmt_double(*rep.gamma_tilde_achieved)
              << "\n";
  if (have_truth)
    std::cout << "pi0_achieved=" << detail::fmt_double(rep.pi0_achieved) << "\n";
  else
    std::cout << "pi0_achieved=n/a (no --truth file)\n";
  if (rep.psi0_achieved)
    std::cout << "psi0_achieved=" << detail::fmt_double(*rep.psi0_achieved) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community recovery in block models by sample-splitting refinement"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string format = "tsv";
  app.add_option("--seed", seed, "Root RNG seed")->capture_default_str();
  app.add_option("--format", format, "File format: tsv|csv")->capture_default_str();

  // generate
  ModelFlags mf;
  std::string gen_out = "graph";
  CLI::App* gen = app.add_subcommand("generate", "Sample a block-model graph to disk");
  gen->add_option("--n", mf.n, "Number of nodes")->required();
  gen->add_option("-k,--communities", mf.K, "Number of communities")->capture_default_str();
  gen->add_option("--b0", mf.b0_text, "Base connectivity, rows ';'-separated")
      ->capture_default_str();
  gen->add_option("--alpha", mf.alpha, "Absolute edge-density scale in [0,1]");
  gen->add_option("--alpha-scale", mf.alpha_scale, "a, giving alpha = a*log(n)/n");
  gen->add_option("--proportions", mf.proportions_text, "Community proportions (default balanced)");
  gen->add_option("--model", mf.model, "sbm|dcbm")->capture_default_str();
  gen->add_option("--psi-low", mf.psi_low, "DCBM activeness floor before rescaling")
      ->capture_default_str();
  gen->add_option("-o,--out", gen_out, "Output path prefix")->capture_default_str();

  // recover
  std::string rec_graph, rec_method = "split", rec_recoverer, rec_subroutine = "mst";
  std::string rec_truth, rec_out = "recovered";
  int rec_k = 0, rec_folds = 2;
  bool rec_spherical = false;
  CLI::App* rec = app.add_subcommand("recover", "Recover communities from a graph file");
  rec->add_option("graph", rec_graph, "Edge-list file")->required();
  rec->add_option("-k,--communities", rec_k, "Number of communities")->required();
  rec->add_option("--method", rec_method, "baseline|split|vfold|self")->capture_default_str();
  rec->add_option("--folds", rec_folds, "Folds for --method vfold")->capture_default_str();
  rec->add_option("--recoverer", rec_recoverer, "Initial recoverer: spectral|spherical");
  rec->add_option("--subroutine", rec_subroutine, "Clustering subroutine: mst|kmeans")
      ->capture_default_str();
  rec->add_flag("--spherical", rec_spherical, "Normalize embeddings (degree-corrected data)");
  rec->add_option("--truth", rec_truth, "Ground-truth membership file for scoring");
  rec->add_option("-o,--out", rec_out, "Output path prefix")->capture_default_str();

  // bench
  std::string bench_config, bench_out;
  int bench_threads = -1;
  bool bench_timings = false;
  CLI::App* bench = app.add_subcommand("bench", "Run a Monte Carlo benchmark from a config");
  bench->add_option("config", bench_config, "key=value config file")->required();
  bench->add_option("--threads", bench_threads, "Worker threads (0 = all cores)");
  bench->add_option("-o,--out", bench_out, "Override the config output path");
  bench->add_flag("--timings", bench_timings,
                  "Record wall-clock times (makes output files run-dependent)");

  // inspect
  std::string ins_b0, ins_truth, ins_psi;
  double ins_alpha = 1.0;
  CLI::App* ins = app.add_subcommand("inspect", "Audit model assumptions");
  ins->add_option("--b0", ins_b0, "Base connectivity matrix")->required();
  ins->add_option("--alpha", ins_alpha, "Edge-density scale")->capture_default_str();
  ins->add_option("--truth", ins_truth, "Membership file (for pi0)");
  ins->add_option("--psi", ins_psi, "Activeness file (for psi0)");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return cmd_generate(mf, seed, format, gen_out);
    if (rec->parsed()) {
      if (rec_recoverer.empty()) rec_recoverer = rec_spherical ? "spherical" : "spectral";
      return cmd_recover(rec_graph, rec_k, rec_method, rec_folds, rec_recoverer, rec_subroutine,
                         rec_spherical, seed, rec_truth, format, rec_out);
    }
    if (bench->parsed()) {
      std::optional<int> th;
      if (bench_threads >= 0) th = bench_threads;
      std::optional<std::uint64_t> sd;
      if (app.count("--seed") > 0) sd = seed;  // explicit --seed overrides the config
      return cmd_bench(bench_config, th, sd, bench_out, bench_timings);
    }
    if (ins->parsed()) return cmd_inspect(ins_b0, ins_alpha, ins_truth, ins_psi, format);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const splitclust::usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const splitclust::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const splitclust::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
