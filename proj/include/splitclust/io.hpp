#pragma once

// Dataset ingestion and result serialization. Formats are deliberately
// plain: whitespace- or comma-delimited edge pairs with '#' comments, id/label
// membership lines, key=value run configs, and delimited result tables. All
// writers stamp the seed and tool version in a header comment line.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "splitclust/errors.hpp"
#include "splitclust/eval.hpp"
#include "splitclust/model.hpp"
#include "splitclust/version.hpp"

namespace splitclust {

// ---------------------------------------------------------------------------
// Small parsing helpers

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_fields(const std::string& line, bool csv) {
  std::vector<std::string> out;
  if (csv) {
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        out.push_back(trim(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    out.push_back(trim(cur));
    while (!out.empty() && out.back().empty()) out.pop_back();
  } else {
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
  }
  return out;
}

inline std::optional<long long> parse_int(const std::string& s) {
  long long v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) return std::nullopt;
  return v;
}

inline double parse_double_or(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw usage_error("invalid numeric value for " + what + ": '" + s + "'");
  }
}

inline bool is_csv_format(const std::string& format) {
  if (format == "csv") return true;
  if (format == "tsv") return false;
  throw usage_error("unknown format '" + format + "' (expected tsv|csv)");
}

inline std::string fmt_double(double x, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Edge lists

struct LoadedGraph {
  AdjacencyMatrix A = AdjacencyMatrix::zero(0);
  std::vector<std::string> index_to_id;  // original node ids by matrix index
  int dropped_self_loops = 0;
  int merged_duplicates = 0;

  int index_of(const std::string& id) const {
    for (std::size_t i = 0; i < index_to_id.size(); ++i)
      if (index_to_id[i] == id) return static_cast<int>(i);
    return -1;
  }
};

/// Reads an undirected edge list. Integer ids are reindexed by numeric order
/// (or taken as 0..N-1 verbatim when a '# nodes=N' directive declares the
/// universe, which preserves isolated nodes); string ids are reindexed
/// lexicographically. Self-loops are dropped with a count; duplicate and
/// reversed pairs merge into one edge.
inline LoadedGraph load_edge_list(const std::string& path, const std::string& format = "tsv") {
  const bool csv = detail::is_csv_format(format);
  std::ifstream in(path);
  if (!in) throw data_error("cannot open edge list: " + path);

  std::vector<std::pair<std::string, std::string>> raw;
  std::optional<long long> declared_nodes;
  std::string line;
  long line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    if (body[0] == '#') {
      const auto pos = body.find("nodes=");
      if (pos != std::string::npos) {
        const auto v = detail::parse_int(detail::trim(body.substr(pos + 6)));
        if (v && *v >= 0) declared_nodes = *v;
      }
      continue;
    }
    const std::vector<std::string> f = detail::split_fields(body, csv);
    if (f.size() != 2)
      throw data_error("line " + std::to_string(line_no) + ": expected 2 fields, found " +
                       std::to_string(f.size()));
    if (first_data_line) {
      first_data_line = false;
      // Optional header row: recognized column names, not both numeric.
      static const std::set<std::string> header_words = {"source", "target", "from", "to",
                                                         "u",      "v",      "node1", "node2"};
      std::string a = f[0], b = f[1];
      for (auto* s : {&a, &b})
        for (char& ch : *s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      if (header_words.count(a) && header_words.count(b) && !detail::parse_int(f[0]) &&
          !detail::parse_int(f[1]))
        continue;
    }
    raw.emplace_back(f[0], f[1]);
  }
  if (raw.empty()) throw data_error("edge list is empty: " + path);

  bool all_int = true;
  for (const auto& [a, b] : raw)
    if (!detail::parse_int(a) || !detail::parse_int(b)) {
      all_int = false;
      break;
    }

  LoadedGraph out;
  std::map<std::string, int> index_of;
  if (all_int) {
    std::set<long long> ids;
    for (const auto& [a, b] : raw) {
      ids.insert(*detail::parse_int(a));
      ids.insert(*detail::parse_int(b));
    }
    long long n = 0;
    if (declared_nodes) {
      n = *declared_nodes;
      if (!ids.empty() && (*ids.begin() < 0 || *ids.rbegin() >= n))
        throw data_error("edge endpoint outside declared universe 0..n-1");
      for (long long i = 0; i < n; ++i) out.index_to_id.push_back(std::to_string(i));
    } else {
      n = static_cast<long long>(ids.size());
      for (long long id : ids) out.index_to_id.push_back(std::to_string(id));
    }
    if (n > 32768) throw data_error("graph too large for dense storage (n > 32768)");
    for (std::size_t i = 0; i < out.index_to_id.size(); ++i)
      index_of[out.index_to_id[i]] = static_cast<int>(i);
    // Normalize integer spelling so "01" and "1" collide deliberately.
    std::map<std::string, int> canon;
    for (auto& [k, v] : index_of) canon[k] = v;
    index_of = std::move(canon);
    auto lookup = [&](const std::string& s) { return index_of.at(std::to_string(*detail::parse_int(s))); };
    std::set<std::pair<int, int>> edges;
    for (const auto& [a, b] : raw) {
      const int u = lookup(a);
      const int v = lookup(b);
      if (u == v) {
        ++out.dropped_self_loops;
        continue;
      }
      if (!edges.emplace(std::min(u, v), std::max(u, v)).second) ++out.merged_duplicates;
    }
    std::vector<std::pair<int, int>> ev(edges.begin(), edges.end());
    out.A = AdjacencyMatrix::from_edges(static_cast<int>(out.index_to_id.size()), ev);
  } else {
    std::set<std::string> ids;
    for (const auto& [a, b] : raw) {
      ids.insert(a);
      ids.insert(b);
    }
    if (ids.size() > 32768) throw data_error("graph too large for dense storage (n > 32768)");
    for (const std::string& id : ids) {
      index_of[id] = static_cast<int>(out.index_to_id.size());
      out.index_to_id.push_back(id);
    }
    std::set<std::pair<int, int>> edges;
    for (const auto& [a, b] : raw) {
      const int u = index_of.at(a);
      const int v = index_of.at(b);
      if (u == v) {
        ++out.dropped_self_loops;
        continue;
      }
      if (!edges.emplace(std::min(u, v), std::max(u, v)).second) ++out.merged_duplicates;
    }
    std::vector<std::pair<int, int>> ev(edges.begin(), edges.end());
    out.A = AdjacencyMatrix::from_edges(static_cast<int>(out.index_to_id.size()), ev);
  }
  return out;
}

inline void write_edge_list(const std::string& path, const AdjacencyMatrix& A,
                            const std::string& format, std::uint64_t seed) {
  const bool csv = detail::is_csv_format(format);
  std::ofstream out(path);
  if (!out) throw data_error("cannot write edge list: " + path);
  const char sep = csv ? ',' : '\t';
  out << "# splitclust " << kVersion << " edge-list seed=" << seed << "\n";
  out << "# nodes=" << A.size() << "\n";
  for (int i = 0; i < A.size(); ++i) {
    const auto r = A.row(i);
    for (int j = i + 1; j < A.size(); ++j)
      if (r[j]) out << i << sep << j << "\n";
  }
}

// ---------------------------------------------------------------------------
// Membership files

inline void write_membership(const std::string& path, const Membership& m,
                             const std::string& format, std::uint64_t seed,
                             const std::vector<std::string>* index_to_id = nullptr) {
  const bool csv = detail::is_csv_format(format);
  std::ofstream out(path);
  if (!out) throw data_error("cannot write membership: " + path);
  const char sep = csv ? ',' : '\t';
  out << "# splitclust " << kVersion << " membership seed=" << seed << "\n";
  for (int p = 0; p < m.size(); ++p) {
    if (index_to_id)
      out << index_to_id->at(m.id_at(p));
    else
      out << m.id_at(p);
    out << sep << m.label_at(p) << "\n";
  }
}

/// Reads id/label lines. With an id map, ids resolve through it (original
/// graph ids); without, ids must be integers and are used verbatim.
inline Membership load_membership(const std::string& path, const std::string& format = "tsv",
                                  const std::vector<std::string>* index_to_id = nullptr) {
  const bool csv = detail::is_csv_format(format);
  std::ifstream in(path);
  if (!in) throw data_error("cannot open membership: " + path);
  std::map<std::string, int> index_of;
  if (index_to_id)
    for (std::size_t i = 0; i < index_to_id->size(); ++i)
      index_of[(*index_to_id)[i]] = static_cast<int>(i);

  std::vector<int> ids, labels;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string body = detail::trim(line);
    if (body.empty() || body[0] == '#') continue;
    const std::vector<std::string> f = detail::split_fields(body, csv);
    if (f.size() != 2)
      throw data_error("line " + std::to_string(line_no) + ": expected id and label");
    const auto lab = detail::parse_int(f[1]);
    if (!lab || *lab < 1)
      throw data_error("line " + std::to_string(line_no) + ": bad label '" + f[1] + "'");
    int id = -1;
    if (index_to_id) {
      auto it = index_of.find(f[0]);
      if (it == index_of.end()) {
        const auto as_int = detail::parse_int(f[0]);
        if (as_int) it = index_of.find(std::to_string(*as_int));
      }
      if (it == index_of.end())
        throw data_error("line " + std::to_string(line_no) + ": unknown node id '" + f[0] + "'");
      id = it->second;
    } else {
      const auto as_int = detail::parse_int(f[0]);
      if (!as_int || *as_int < 0)
        throw data_error("line " + std::to_string(line_no) + ": bad node id '" + f[0] + "'");
      id = static_cast<int>(*as_int);
    }
    ids.push_back(id);
    labels.push_back(static_cast<int>(*lab));
  }
  if (ids.empty()) throw data_error("membership file is empty: " + path);
  return Membership(std::move(ids), std::move(labels));
}

// ---------------------------------------------------------------------------
// Run configuration (key=value)

struct BenchConfig {
  ExperimentSpec spec;
  std::string out = "results.csv";
  std::string format = "csv";
};

inline std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const std::string& tok : detail::split_fields(s, true))
    out.push_back(detail::parse_double_or(tok, what));
  return out;
}

/// Parses a K x K matrix written as ';'-separated rows of ','-separated
/// entries, e.g. "1,0.3;0.3,1".
inline std::vector<double> parse_matrix(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::size_t rows = 0, cols = 0;
  std::string cur;
  std::istringstream iss(s);
  while (std::getline(iss, cur, ';')) {
    const std::vector<double> row = parse_double_list(cur, what);
    if (rows == 0) cols = row.size();
    if (row.size() != cols || row.empty())
      throw usage_error(what + ": rows must be non-empty and equal length");
    out.insert(out.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows != cols) throw usage_error(what + ": matrix must be square");
  return out;
}

inline BenchConfig parse_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open config: " + path);
  BenchConfig cfg;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string body = detail::trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw usage_error("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string val = detail::trim(body.substr(eq + 1));
    auto as_int = [&](const char* what) {
      const auto v = detail::parse_int(val);
      if (!v) throw usage_error(std::string("config: bad integer for ") + what + ": '" + val + "'");
      return *v;
    };
    auto as_bool = [&]() {
      if (val == "true" || val == "1" || val == "yes") return true;
      if (val == "false" || val == "0" || val == "no") return false;
      throw usage_error("config: bad boolean '" + val + "' for key '" + key + "'");
    };
    if (key == "n") cfg.spec.n = static_cast<int>(as_int("n"));
    else if (key == "k") cfg.spec.K = static_cast<int>(as_int("k"));
    else if (key == "b0") cfg.spec.b0 = parse_matrix(val, "b0");
    else if (key == "proportions") cfg.spec.proportions = parse_double_list(val, "proportions");
    else if (key == "model") {
      if (val == "sbm") cfg.spec.dcbm = false;
      else if (val == "dcbm") cfg.spec.dcbm = true;
      else throw usage_error("config: unknown model '" + val + "' (expected sbm|dcbm)");
    }
    else if (key == "psi_low") cfg.spec.psi_low = detail::parse_double_or(val, "psi_low");
    else if (key == "alphas") cfg.spec.alphas = parse_double_list(val, "alphas");
    else if (key == "method") cfg.spec.method = val;
    else if (key == "folds") cfg.spec.folds = static_cast<int>(as_int("folds"));
    else if (key == "trials") cfg.spec.trials = static_cast<int>(as_int("trials"));
    else if (key == "seed") cfg.spec.seed = static_cast<std::uint64_t>(as_int("seed"));
    else if (key == "recoverer") cfg.spec.recoverer = val;
    else if (key == "subroutine") cfg.spec.subroutine = val;
    else if (key == "spherical") cfg.spec.spherical = as_bool();
    else if (key == "threads") cfg.spec.threads = static_cast<int>(as_int("threads"));
    else if (key == "out") cfg.out = val;
    else if (key == "format") cfg.format = val;
    else throw usage_error("config: unknown key '" + key + "'");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Result tables

inline void write_results(const std::string& path, const std::vector<AlphaResult>& rows,
                          const std::string& format, std::uint64_t seed) {
  const bool csv = detail::is_csv_format(format);
  std::ofstream out(path);
  if (!out) throw data_error("cannot write results: " + path);
  const char sep = csv ? ',' : '\t';
  out << "# splitclust " << kVersion << " bench seed=" << seed << "\n";
  out << "a" << sep << "alpha" << sep << "method" << sep << "trials" << sep << "exact_freq"
      << sep << "wilson_lo" << sep << "wilson_hi" << sep << "mean_err_rate" << sep
      << "median_err_rate" << sep << "wall_ms" << "\n";
  for (const AlphaResult& r : rows) {
    out << detail::fmt_double(r.a) << sep << detail::fmt_double(r.alpha) << sep << r.method
        << sep << r.trials << sep << detail::fmt_double(r.exact_freq, "%.6f") << sep
        << detail::fmt_double(r.wilson_lo, "%.6f") << sep
        << detail::fmt_double(r.wilson_hi, "%.6f") << sep
        << detail::fmt_double(r.mean_err_rate, "%.6f") << sep
        << detail::fmt_double(r.median_err_rate, "%.6f") << sep
        << detail::fmt_double(r.wall_ms, "%.3f") << "\n";
  }
}

inline void write_report(const std::string& path, const RecoveryReport& rep,
                         const std::string& format, std::uint64_t seed) {
  const bool csv = detail::is_csv_format(format);
  std::ofstream out(path);
  if (!out) throw data_error("cannot write report: " + path);
  const char sep = csv ? ',' : '\t';
  out << "# splitclust " << kVersion << " report seed=" << seed << "\n";
  out << "errors" << sep << rep.errors << "\n";
  out << "error_rate" << sep << detail::fmt_double(rep.error_rate, "%.6f") << "\n";
  out << "exact" << sep << (rep.exact ? "true" : "false") << "\n";
  out << "permutation" << sep;
  for (std::size_t i = 0; i < rep.best_permutation.size(); ++i) {
    if (i) out << ' ';
    out << rep.best_permutation[i];
  }
  out << "\n";
}

}  // namespace splitclust
