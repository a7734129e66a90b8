#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "graphlay/core.hpp"

namespace graphlay {

/// Simple connected undirected graph with dense 0-based node indices.
/// Immutable after construction; construction validates all invariants
/// (no self-loops, no duplicate edges, connectivity).
class Graph {
 public:
  Graph() = default;  // empty placeholder; real graphs come from from_edges

  /// Builds a graph from an edge list. Edges are normalized to (min,max)
  /// and deduplicated. Throws InputError on self-loops and
  /// DisconnectedError when the result is not connected.
  /// `labels` holds the original file node ids; defaults to decimal indices.
  static Graph from_edges(int num_nodes, std::vector<std::pair<int, int>> edges,
                          std::vector<std::string> labels = {});

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  /// Sorted unique edges with u < v.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  const std::string& label(int v) const { return labels_[v]; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Content hash over node count and the sorted edge set.
  std::uint64_t content_hash() const;

 private:
  int num_nodes_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::string> labels_;
};

/// Connectivity test on a candidate edge set (no Graph invariants assumed).
bool is_connected(int num_nodes, const std::vector<std::pair<int, int>>& edges);

struct DegreeStats {
  int min = 0;
  int max = 0;
  double mean = 0.0;
};

DegreeStats degree_stats(const Graph& g);

/// All-pairs shortest-path hop counts. Entries are finite by the
/// connectivity invariant of Graph.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(int n) : n_(n), d_(static_cast<size_t>(n) * n, 0) {}

  int operator()(int i, int j) const { return d_[static_cast<size_t>(i) * n_ + j]; }
  int& at(int i, int j) { return d_[static_cast<size_t>(i) * n_ + j]; }
  int n() const { return n_; }
  int max_distance() const;

 private:
  int n_ = 0;
  std::vector<int> d_;
};

/// BFS from every source; rows computed independently (OpenMP).
DistanceMatrix all_pairs_bfs(const Graph& g);

namespace serial {
DistanceMatrix all_pairs_bfs(const Graph& g);
}

/// Edge-list format: one "u v" pair of decimal indices per line,
/// whitespace-separated; '#' starts a comment; blank lines ignored.
Graph parse_edge_list(std::istream& in);
Graph parse_edge_list_text(const std::string& text);

/// GraphML subset: <graph>, <node id="..."/>, <edge source="..." target="..."/>.
/// Other elements and all attributes beyond those are ignored. Node ids are
/// remapped to dense indices in document order; originals kept as labels.
Graph parse_graphml(std::istream& in);
Graph parse_graphml_text(const std::string& text);

/// Dispatches on extension: .graphml / .xml to the GraphML parser,
/// anything else to the edge-list parser.
Graph load_graph_file(const std::string& path);

/// Canonical edge-list serialization (one edge per line, u < v, sorted).
std::string to_edge_list(const Graph& g);

}  // namespace graphlay
