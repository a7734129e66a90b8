#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "graphlay/graph.hpp"
#include "graphlay/layouts.hpp"
#include "graphlay/metrics.hpp"
#include "graphlay/stats.hpp"

namespace graphlay {

/// Erdos-Renyi G(n,p) with p drawn from a sparse-to-moderate range,
/// resampled until connected (spanning-tree fallback after 100 attempts).
Graph generate_random_connected(int n, std::uint64_t seed);

/// Sparse connected graphs shaped like the Rome corpus: random spanning
/// tree plus extra edges, N in [10, 107], |E| about N * U[1.05, 1.5]
/// capped at 158.
Graph generate_rome_like(std::uint64_t seed);

enum class SplitKind { train, validation, test };

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  std::vector<std::string> ids;
  std::vector<SplitKind> split;
  std::uint64_t split_seed = 0;

  std::vector<int> indices_of(SplitKind kind) const;
};

/// Seeded shuffle then contiguous split; sizes are floor(fraction * n)
/// with the remainder going to train. Fractions are (train, val, test).
Dataset split_dataset(std::vector<Graph> graphs, std::vector<std::string> ids,
                      const std::array<double, 3>& fractions, std::uint64_t seed);

struct MethodSpec {
  std::string name;
  std::function<Layout(const Graph&, std::uint64_t seed)> run;
};

/// Named layout engines usable from the benchmark and the CLI:
/// tsnet, tsnet-star, pivotmds, sgd, random.
std::vector<MethodSpec> builtin_methods();
const MethodSpec* find_method(const std::vector<MethodSpec>& methods,
                              const std::string& name);

struct BenchRow {
  std::string graph_id;
  std::string method;
  MetricReport report;
  bool ok = true;
};

struct BenchmarkReport {
  std::vector<BenchRow> rows;  // sorted by (graph_id, method)
  std::vector<std::string> method_names;
  std::vector<StatResult> stats;      // one per metric, empty when < 2 methods
  std::vector<int> failure_counts;    // per method
  /// mean[i][m], std[i][m]: metric i, method m (over ok rows).
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> stds;
  /// best_significant[i] = method index highlighted for metric i, or -1.
  std::vector<int> best_significant;
};

struct BenchmarkOptions {
  std::uint64_t seed = 42;
  bool wall_timing = false;  // keep time_ms deterministic (zero) by default
  MetricOptions metrics;
  double alpha = 0.05;
};

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "stress",          "aspect_ratio",     "angular_resolution",
      "crossings",       "cluster_overlap",  "neighborhood_preservation",
      "time_ms"};
  return names;
}

/// Runs every (graph, method) pair (work pool), evaluates the metric
/// suite, and aggregates means, omnibus and pairwise statistics, and the
/// paper-style significance highlighting (best mean with all pairwise
/// p < alpha). Method failures are recorded and excluded from statistics.
BenchmarkReport run_benchmark(const std::vector<MethodSpec>& methods,
                              const std::vector<Graph>& graphs,
                              const std::vector<std::string>& graph_ids,
                              const BenchmarkOptions& opts);

std::string benchmark_raw_csv(const BenchmarkReport& report);
std::string benchmark_pmatrix_csv(const BenchmarkReport& report, int metric_index);
std::string benchmark_markdown(const BenchmarkReport& report);

}  // namespace graphlay
