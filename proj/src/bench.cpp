#include "graphlay/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace graphlay {

Graph generate_random_connected(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random graph needs n >= 2");
  Rng rng(stable_seed(seed, "er_gen", static_cast<std::uint64_t>(n)));
  const double lo = 1.1 * std::log(static_cast<double>(n)) / n;
  const double hi = std::min(1.0, 4.0 / n + 0.1);
  std::vector<std::pair<int, int>> edges;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double p = rng.uniform(std::min(lo, hi), hi);
    edges.clear();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform() < p) edges.emplace_back(i, j);
    if (is_connected(n, edges)) return Graph::from_edges(n, std::move(edges));
  }
  // Connect the last sample with a random spanning tree.
  std::vector<int> order = rng.permutation(n);
  for (int i = 1; i < n; ++i)
    edges.emplace_back(order[i], order[rng.uniform_int(i)]);
  return Graph::from_edges(n, std::move(edges));
}

Graph generate_rome_like(std::uint64_t seed) {
  Rng rng(stable_seed(seed, "rome_like"));
  const int n = 10 + rng.uniform_int(98);  // N in [10, 107]
  const int max_edges = std::min(158, n * (n - 1) / 2);
  const int target_m =
      std::min(max_edges, static_cast<int>(std::lround(n * rng.uniform(1.05, 1.5))));

  std::set<std::pair<int, int>> edge_set;
  // Random recursive spanning tree keeps degrees moderate.
  for (int i = 1; i < n; ++i) {
    const int parent = rng.uniform_int(i);
    edge_set.emplace(std::min(i, parent), std::max(i, parent));
  }
  int guard = 0;
  while (static_cast<int>(edge_set.size()) < target_m && guard++ < 10000) {
    const int u = rng.uniform_int(n);
    const int v = rng.uniform_int(n);
    if (u == v) continue;
    edge_set.emplace(std::min(u, v), std::max(u, v));
  }
  std::vector<std::pair<int, int>> edges(edge_set.begin(), edge_set.end());
  return Graph::from_edges(n, std::move(edges));
}

std::vector<int> Dataset::indices_of(SplitKind kind) const {
  std::vector<int> out;
  for (size_t i = 0; i < split.size(); ++i)
    if (split[i] == kind) out.push_back(static_cast<int>(i));
  return out;
}

Dataset split_dataset(std::vector<Graph> graphs, std::vector<std::string> ids,
                      const std::array<double, 3>& fractions, std::uint64_t seed) {
  if (graphs.empty()) throw InputError("cannot split an empty dataset");
  if (ids.size() != graphs.size()) throw std::invalid_argument("ids size mismatch");
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");

  const int n = static_cast<int>(graphs.size());
  int n_val = static_cast<int>(std::floor(fractions[1] * n));
  int n_test = static_cast<int>(std::floor(fractions[2] * n));
  int n_train = n - n_val - n_test;  // floor remainder goes to train
  if (n_train <= 0 || (fractions[1] > 0 && n_val == 0) ||
      (fractions[2] > 0 && n_test == 0))
    throw InputError("split produces an empty part");

  Rng rng(stable_seed(seed, "dataset_split"));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  Dataset ds;
  ds.split_seed = seed;
  ds.graphs = std::move(graphs);
  ds.ids = std::move(ids);
  ds.split.assign(n, SplitKind::train);
  for (int pos = 0; pos < n; ++pos) {
    SplitKind kind = SplitKind::train;
    if (pos >= n_train && pos < n_train + n_val)
      kind = SplitKind::validation;
    else if (pos >= n_train + n_val)
      kind = SplitKind::test;
    ds.split[order[pos]] = kind;
  }
  return ds;
}

std::vector<MethodSpec> builtin_methods() {
  std::vector<MethodSpec> m;
  m.push_back({"tsnet", [](const Graph& g, std::uint64_t seed) {
                 return tsnet_layout(g, Schedule::tsnet(), seed).layout;
               }});
  m.push_back({"tsnet-star", [](const Graph& g, std::uint64_t seed) {
                 return tsnet_layout(g, Schedule::tsnet_star(), seed).layout;
               }});
  m.push_back({"pivotmds", [](const Graph& g, std::uint64_t seed) {
                 return pivot_mds(g, seed);
               }});
  m.push_back({"sgd", [](const Graph& g, std::uint64_t seed) {
                 return sgd_stress(g, seed);
               }});
  m.push_back({"random", [](const Graph& g, std::uint64_t seed) {
                 return random_layout(g.num_nodes(), seed);
               }});
  return m;
}

const MethodSpec* find_method(const std::vector<MethodSpec>& methods,
                              const std::string& name) {
  for (const MethodSpec& m : methods)
    if (m.name == name) return &m;
  return nullptr;
}

namespace {

double metric_value(const MetricReport& r, int metric_index) {
  switch (metric_index) {
    case 0: return r.stress;
    case 1: return r.aspect_ratio;
    case 2: return r.angular_resolution;
    case 3: return r.crossing_count;
    case 4: return r.cluster_overlap;
    case 5: return r.neighborhood_preservation;
    case 6: return r.execution_time_ms;
    default: throw std::invalid_argument("bad metric index");
  }
}

}  // namespace

BenchmarkReport run_benchmark(const std::vector<MethodSpec>& methods,
                              const std::vector<Graph>& graphs,
                              const std::vector<std::string>& graph_ids,
                              const BenchmarkOptions& opts) {
  if (methods.empty()) throw std::invalid_argument("no methods to benchmark");
  if (graphs.size() != graph_ids.size())
    throw std::invalid_argument("graph id list size mismatch");

  const int ng = static_cast<int>(graphs.size());
  const int nm = static_cast<int>(methods.size());

  // Distance matrices are shared between methods of the same graph.
  std::vector<DistanceMatrix> dists(ng);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < ng; ++i) dists[i] = serial::all_pairs_bfs(graphs[i]);

  BenchmarkReport report;
  report.rows.resize(static_cast<size_t>(ng) * nm);
  for (const MethodSpec& m : methods) report.method_names.push_back(m.name);
  report.failure_counts.assign(nm, 0);

  // Work pool over (graph, method) tasks.
#pragma omp parallel for schedule(dynamic) collapse(2)
  for (int gi = 0; gi < ng; ++gi) {
    for (int mi = 0; mi < nm; ++mi) {
      BenchRow& row = report.rows[static_cast<size_t>(gi) * nm + mi];
      row.graph_id = graph_ids[gi];
      row.method = methods[mi].name;
      try {
        const std::uint64_t seed =
            stable_seed(stable_seed(opts.seed, methods[mi].name),
                        "graph", static_cast<std::uint64_t>(gi));
        const auto t0 = std::chrono::steady_clock::now();
        const Layout x = methods[mi].run(graphs[gi], seed);
        const auto t1 = std::chrono::steady_clock::now();
        const double ms =
            opts.wall_timing
                ? std::chrono::duration<double, std::milli>(t1 - t0).count()
                : 0.0;
        row.report = evaluate_all(x, graphs[gi], dists[gi], ms, opts.metrics);
        row.ok = true;
      } catch (const std::exception&) {
        row.ok = false;
      }
    }
  }

  std::sort(report.rows.begin(), report.rows.end(),
            [](const BenchRow& a, const BenchRow& b) {
              return a.graph_id != b.graph_id ? a.graph_id < b.graph_id
                                              : a.method < b.method;
            });

  for (const BenchRow& row : report.rows)
    if (!row.ok) {
      for (int mi = 0; mi < nm; ++mi)
        if (methods[mi].name == row.method) ++report.failure_counts[mi];
    }

  const int n_metrics = static_cast<int>(metric_names().size());
  report.means.assign(n_metrics, std::vector<double>(nm, 0.0));
  report.stds.assign(n_metrics, std::vector<double>(nm, 0.0));
  report.best_significant.assign(n_metrics, -1);

  for (int metric = 0; metric < n_metrics; ++metric) {
    std::vector<std::vector<double>> groups(nm);
    for (const BenchRow& row : report.rows) {
      if (!row.ok) continue;
      for (int mi = 0; mi < nm; ++mi)
        if (report.method_names[mi] == row.method)
          groups[mi].push_back(metric_value(row.report, metric));
    }
    for (int mi = 0; mi < nm; ++mi) {
      const auto& v = groups[mi];
      if (v.empty()) continue;
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
      report.means[metric][mi] = mean;
      report.stds[metric][mi] = std::sqrt(var);
    }
    if (nm < 2) continue;
    bool all_nonempty = true;
    for (const auto& v : groups) all_nonempty &= !v.empty();
    if (!all_nonempty) continue;

    const KruskalWallisResult kw = kruskal_wallis(groups);
    const ConoverResult conover = conover_posthoc(groups);
    StatResult sr;
    sr.metric = metric_names()[metric];
    sr.group_names = report.method_names;
    sr.h = kw.h;
    sr.p_omnibus = kw.p;
    sr.pairwise_p = conover.p;
    sr.alpha = opts.alpha;
    report.stats.push_back(std::move(sr));

    // Highlight: best mean whose pairwise p against every other method
    // clears alpha.
    int best = 0;
    for (int mi = 1; mi < nm; ++mi)
      if (report.means[metric][mi] < report.means[metric][best]) best = mi;
    bool significant = true;
    for (int mi = 0; mi < nm; ++mi)
      if (mi != best && !(conover.p(best, mi) < opts.alpha)) significant = false;
    if (significant) report.best_significant[metric] = best;
  }
  return report;
}

std::string benchmark_raw_csv(const BenchmarkReport& report) {
  std::string out = metric_csv_header() + "\n";
  for (const BenchRow& row : report.rows)
    out += metric_csv_row(row.graph_id, row.method, row.report,
                          row.ok ? "ok" : "failed") +
           "\n";
  return out;
}

std::string benchmark_pmatrix_csv(const BenchmarkReport& report, int metric_index) {
  const StatResult* sr = nullptr;
  for (const StatResult& s : report.stats)
    if (s.metric == metric_names()[metric_index]) sr = &s;
  if (!sr) return "";
  std::string out = "method";
  for (const std::string& name : sr->group_names) out += "," + name;
  out += "\n";
  for (size_t a = 0; a < sr->group_names.size(); ++a) {
    out += sr->group_names[a];
    for (size_t b = 0; b < sr->group_names.size(); ++b) {
      out += ",";
      out += format_double(sr->pairwise_p(static_cast<int>(a), static_cast<int>(b)));
    }
    out += "\n";
  }
  return out;
}

namespace {

std::string round3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::string benchmark_markdown(const BenchmarkReport& report) {
  std::ostringstream os;
  os << "# Benchmark summary\n\n";
  os << "Values are mean +/- std; **bold** marks the best mean whose pairwise "
        "Conover p-values against every other method are below alpha.\n\n";
  os << "| method |";
  for (const std::string& m : metric_names()) os << ' ' << m << " |";
  os << "\n|---|";
  for (size_t i = 0; i < metric_names().size(); ++i) os << "---|";
  os << "\n";
  for (size_t mi = 0; mi < report.method_names.size(); ++mi) {
    os << "| " << report.method_names[mi] << " |";
    for (size_t metric = 0; metric < metric_names().size(); ++metric) {
      const bool bold = report.best_significant[metric] == static_cast<int>(mi);
      os << ' ';
      if (bold) os << "**";
      os << round3(report.means[metric][mi]) << " +/- "
         << round3(report.stds[metric][mi]);
      if (bold) os << "**";
      os << " |";
    }
    os << "\n";
  }
  bool any_fail = false;
  for (int f : report.failure_counts) any_fail |= f > 0;
  if (any_fail) {
    os << "\nFailures:";
    for (size_t mi = 0; mi < report.method_names.size(); ++mi)
      if (report.failure_counts[mi] > 0)
        os << ' ' << report.method_names[mi] << "=" << report.failure_counts[mi];
    os << "\n";
  }
  return os.str();
}

}  // namespace graphlay
