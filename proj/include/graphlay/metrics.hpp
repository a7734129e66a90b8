#pragma once

#include <string>
#include <vector>

#include "graphlay/core.hpp"
#include "graphlay/graph.hpp"
#include "graphlay/layouts.hpp"

namespace graphlay {

/// All six drawing-quality metrics read "lower is better".
struct MetricReport {
  double stress = 0.0;
  double aspect_ratio = 0.0;
  double angular_resolution = 0.0;
  double crossing_count = 0.0;
  double cluster_overlap = 0.0;
  double neighborhood_preservation = 0.0;
  double execution_time_ms = 0.0;
};

enum class StressScale { optimal, raw };

/// Weighted stress (w = delta^-2) normalized by N, by default evaluated at
/// the closed-form optimal uniform scale of the layout.
double stress_metric(const Layout& x, const DistanceMatrix& d,
                     StressScale mode = StressScale::optimal);

/// 1 - worst bounding-box ratio min(w,h)/max(w,h) over a rotation grid.
/// `rotations` <= 0 means the per-node default (one angle per node).
double aspect_ratio_metric(const Layout& x, int rotations = 0);

/// 1 - (minimum incident-edge angle) / (2 pi / d_max).
double angular_resolution_metric(const Layout& x, const Graph& g);

/// Number of edge pairs without a shared endpoint whose closed segments
/// intersect. O(E^2) pair scan.
long long crossing_count(const Layout& x, const Graph& g);

namespace serial {
long long crossing_count(const Layout& x, const Graph& g);
}

struct Clustering {
  std::vector<int> assignment;  // dense cluster ids, canonical order
  int num_clusters = 0;
  bool converged = true;
};

/// Markov Cluster algorithm on the column-stochastic adjacency with self
/// loops (expansion 2, inflation 2.0, pruning 1e-5, max 100 iterations).
Clustering mcl_cluster(const Graph& g);

/// Fraction of close-by neighborhood weight that crosses cluster borders,
/// after rescaling the layout to fit the unit square. Radius r defaults
/// to 0.2.
double cluster_overlap_metric(const Layout& x, const Clustering& clusters,
                              double r = 0.2);

/// 1 - mean IoU between each node's k-hop neighborhood and its equally
/// sized set of nearest layout neighbors (ties broken by node index).
double neighborhood_preservation_metric(const Layout& x, const Graph& g, int k = 2);

namespace serial {
double neighborhood_preservation_metric(const Layout& x, const Graph& g, int k = 2);
}

struct MetricOptions {
  int neighborhood_k = 2;
  double overlap_radius = 0.2;
  int aspect_rotations = 0;  // 0 = N
  StressScale stress_scale = StressScale::optimal;
};

MetricReport evaluate_all(const Layout& x, const Graph& g, const DistanceMatrix& d,
                          double timing_ms, const MetricOptions& opts = {});

std::string metric_csv_header();
std::string metric_csv_row(const std::string& graph_id, const std::string& method,
                           const MetricReport& r, const std::string& status);

}  // namespace graphlay
