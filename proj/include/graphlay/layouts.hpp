#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "graphlay/core.hpp"
#include "graphlay/graph.hpp"
#include "graphlay/tsne.hpp"

namespace graphlay {

/// A layout is an N x 2 matrix of node positions in drawing units.
using Layout = Matrix;

/// Sparse multidimensional scaling on BFS distances to a max-min sampled
/// pivot subset; positions are the top-2 left singular directions of the
/// double-centered squared-distance matrix, scaled by singular values.
/// Deterministic given (graph, num_pivots, seed).
Layout pivot_mds(const Graph& g, int num_pivots, std::uint64_t seed);

inline Layout pivot_mds(const Graph& g, std::uint64_t seed) {
  return pivot_mds(g, std::min(50, g.num_nodes()), seed);
}

/// Pairwise stress relaxation by SGD: every epoch visits all unordered
/// pairs in shuffled order, moving each pair toward its graph distance
/// with weight-capped step sizes on an exponentially decaying schedule.
Layout sgd_stress(const Graph& g, int epochs, std::uint64_t seed);

inline Layout sgd_stress(const Graph& g, std::uint64_t seed) {
  return sgd_stress(g, 15, seed);
}

struct TsnetOptions {
  int stage1_max_iters = 1000;
  int stage2_max_iters = 1000;
  double learning_rate = 1.0;
  double grad_clip = 5.0;
  double momentum_early = 0.5;   // first 250 iterations of stage 1
  double momentum_late = 0.8;
  int momentum_switch_iter = 250;
  double rel_tol = 1e-7;         // early stop: relative change over a window
  int tol_window = 50;
  double perplexity = 0.0;       // 0 = default_perplexity(n, n_max)
  int n_max = 128;
};

struct TsnetResult {
  Layout layout;
  double stage1_initial_loss = 0.0;
  double stage1_final_loss = 0.0;
  double stage2_final_loss = 0.0;
  bool converged = true;  // false when an iteration cap was hit
};

/// Two-stage gradient descent with momentum on the layout loss. Stage 1
/// uses the schedule's first weights, stage 2 resets momentum and switches
/// weights. Each stage returns the best-loss layout it saw.
TsnetResult tsnet_layout(const Graph& g, const Schedule& sched, std::uint64_t seed,
                         const TsnetOptions& opts = {});

/// Uniform random positions in the unit square (baseline).
Layout random_layout(int n, std::uint64_t seed);

/// CSV serialization: header "node_id,x,y", one row per node with the
/// graph's original node ids and 17-significant-digit coordinates.
std::string layout_to_csv(const Graph& g, const Layout& x);
void write_layout_csv(const Graph& g, const Layout& x, const std::string& path);

/// Reads a layout CSV back, matching node ids against the graph's labels.
/// Throws InputError listing any missing ids.
Layout read_layout_csv(const Graph& g, std::istream& in);
Layout read_layout_csv_file(const Graph& g, const std::string& path);

}  // namespace graphlay
