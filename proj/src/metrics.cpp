#include "graphlay/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace graphlay {

double stress_metric(const Layout& x, const DistanceMatrix& d, StressScale mode) {
  const int n = x.rows();
  if (d.n() != n) throw std::invalid_argument("layout/distance size mismatch");
  if (n < 2) return 0.0;

  double alpha = 1.0;
  if (mode == StressScale::optimal) {
    // alpha* = sum w delta dist / sum w dist^2, the scale minimizing
    // sum w (alpha dist - delta)^2.
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      double rn = 0.0, rd = 0.0;
      for (int j = i + 1; j < n; ++j) {
        const double delta = static_cast<double>(d(i, j));
        const double w = 1.0 / (delta * delta);
        const double dx = x(i, 0) - x(j, 0);
        const double dy = x(i, 1) - x(j, 1);
        const double dist = std::sqrt(dx * dx + dy * dy);
        rn += w * delta * dist;
        rd += w * dist * dist;
      }
      num += rn;
      den += rd;
    }
    if (den > 0.0) alpha = num / den;  // all-coincident layouts stay unscaled
  }

  std::vector<double> rows(n, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double delta = static_cast<double>(d(i, j));
      const double w = 1.0 / (delta * delta);
      const double dx = x(i, 0) - x(j, 0);
      const double dy = x(i, 1) - x(j, 1);
      const double dist = alpha * std::sqrt(dx * dx + dy * dy);
      acc += 2.0 * w * (dist - delta) * (dist - delta);
    }
    rows[i] = acc;
  }
  double total = 0.0;
  for (double v : rows) total += v;
  return total / n;
}

double aspect_ratio_metric(const Layout& x, int rotations) {
  const int n = x.rows();
  if (n < 2) throw std::invalid_argument("aspect ratio needs N >= 2");
  const int grid = rotations > 0 ? rotations : n;
  double min_ratio = 1.0;
  for (int k = 0; k < grid; ++k) {
    const double theta = 2.0 * M_PI * k / grid;
    const double c = std::cos(theta), s = std::sin(theta);
    double xmin = 1e308, xmax = -1e308, ymin = 1e308, ymax = -1e308;
    for (int i = 0; i < n; ++i) {
      const double rx = c * x(i, 0) - s * x(i, 1);
      const double ry = s * x(i, 0) + c * x(i, 1);
      xmin = std::min(xmin, rx);
      xmax = std::max(xmax, rx);
      ymin = std::min(ymin, ry);
      ymax = std::max(ymax, ry);
    }
    const double w = xmax - xmin;
    const double h = ymax - ymin;
    const double lo = std::min(w, h), hi = std::max(w, h);
    const double ratio = hi > 0.0 ? lo / hi : 0.0;
    min_ratio = std::min(min_ratio, ratio);
  }
  return 1.0 - min_ratio;
}

double angular_resolution_metric(const Layout& x, const Graph& g) {
  const int n = g.num_nodes();
  int dmax = 0;
  for (int v = 0; v < n; ++v) dmax = std::max(dmax, g.degree(v));
  if (dmax < 2) return 0.0;  // no node carries two edges
  const double theta_g = 2.0 * M_PI / dmax;

  double min_angle = M_PI;
  bool any_pair = false;
  for (int v = 0; v < n; ++v) {
    const auto& nb = g.neighbors(v);
    if (nb.size() < 2) continue;
    std::vector<double> dirs;
    std::vector<bool> degenerate;
    dirs.reserve(nb.size());
    for (int u : nb) {
      const double dx = x(u, 0) - x(v, 0);
      const double dy = x(u, 1) - x(v, 1);
      degenerate.push_back(dx == 0.0 && dy == 0.0);
      dirs.push_back(std::atan2(dy, dx));
    }
    for (size_t a = 0; a < dirs.size(); ++a)
      for (size_t b = a + 1; b < dirs.size(); ++b) {
        any_pair = true;
        if (degenerate[a] || degenerate[b]) {
          min_angle = 0.0;
          continue;
        }
        double diff = std::abs(dirs[a] - dirs[b]);
        if (diff > M_PI) diff = 2.0 * M_PI - diff;
        min_angle = std::min(min_angle, diff);
      }
  }
  if (!any_pair) return 0.0;
  return 1.0 - min_angle / theta_g;
}

namespace {

inline double orient(double ax, double ay, double bx, double by, double cx,
                     double cy) {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

inline bool on_segment(double ax, double ay, double bx, double by, double px,
                       double py) {
  return std::min(ax, bx) <= px && px <= std::max(ax, bx) &&
         std::min(ay, by) <= py && py <= std::max(ay, by);
}

// Closed-segment intersection via orientation tests; collinear overlaps
// count as intersecting.
bool segments_intersect(double ax, double ay, double bx, double by, double cx,
                        double cy, double dx, double dy) {
  const double d1 = orient(cx, cy, dx, dy, ax, ay);
  const double d2 = orient(cx, cy, dx, dy, bx, by);
  const double d3 = orient(ax, ay, bx, by, cx, cy);
  const double d4 = orient(ax, ay, bx, by, dx, dy);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(cx, cy, dx, dy, ax, ay)) return true;
  if (d2 == 0 && on_segment(cx, cy, dx, dy, bx, by)) return true;
  if (d3 == 0 && on_segment(ax, ay, bx, by, cx, cy)) return true;
  if (d4 == 0 && on_segment(ax, ay, bx, by, dx, dy)) return true;
  return false;
}

template <bool Parallel>
long long crossing_count_impl(const Layout& x, const Graph& g) {
  const auto& edges = g.edges();
  const int m = static_cast<int>(edges.size());
  long long count = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : count) if (Parallel)
  for (int a = 0; a < m; ++a) {
    const auto [u1, v1] = edges[a];
    for (int b = a + 1; b < m; ++b) {
      const auto [u2, v2] = edges[b];
      if (u1 == u2 || u1 == v2 || v1 == u2 || v1 == v2) continue;
      if (segments_intersect(x(u1, 0), x(u1, 1), x(v1, 0), x(v1, 1), x(u2, 0),
                             x(u2, 1), x(v2, 0), x(v2, 1)))
        ++count;
    }
  }
  return count;
}

}  // namespace

long long crossing_count(const Layout& x, const Graph& g) {
  return crossing_count_impl<true>(x, g);
}

namespace serial {
long long crossing_count(const Layout& x, const Graph& g) {
  return crossing_count_impl<false>(x, g);
}
}  // namespace serial

Clustering mcl_cluster(const Graph& g) {
  const int n = g.num_nodes();
  constexpr double kPrune = 1e-5;
  constexpr double kConvergence = 1e-8;
  constexpr int kMaxIter = 100;

  // Column-stochastic adjacency with self loops.
  Matrix m(n, n);
  for (int j = 0; j < n; ++j) {
    m(j, j) = 1.0;
    for (int i : g.neighbors(j)) m(i, j) = 1.0;
    const double inv = 1.0 / (g.degree(j) + 1.0);
    for (int i = 0; i < n; ++i) m(i, j) *= inv;
  }

  auto normalize_columns = [n](Matrix& a) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += a(i, j);
      if (s > 0.0)
        for (int i = 0; i < n; ++i) a(i, j) /= s;
    }
  };

  Clustering out;
  out.converged = false;
  for (int it = 0; it < kMaxIter; ++it) {
    // Expansion: M <- M^2 (column-parallel).
    Matrix next(n, n);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double mkj = m(k, j);
        if (mkj == 0.0) continue;
        for (int i = 0; i < n; ++i) next(i, j) += m(i, k) * mkj;
      }
    }
    // Inflation: entrywise square, renormalize, prune, renormalize.
    for (size_t idx = 0; idx < next.size(); ++idx)
      next.data()[idx] *= next.data()[idx];
    normalize_columns(next);
    for (size_t idx = 0; idx < next.size(); ++idx)
      if (next.data()[idx] < kPrune) next.data()[idx] = 0.0;
    normalize_columns(next);

    double change = 0.0;
    for (size_t idx = 0; idx < next.size(); ++idx)
      change = std::max(change, std::abs(next.data()[idx] - m.data()[idx]));
    m = std::move(next);
    if (change < kConvergence) {
      out.converged = true;
      break;
    }
  }

  // Attractors are nodes with residual mass on their own row; each
  // attractor's support forms a cluster, merged over shared nodes.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  for (int i = 0; i < n; ++i) {
    if (m(i, i) <= 0.0) continue;
    for (int j = 0; j < n; ++j)
      if (m(i, j) > 0.0) unite(j, i);
  }
  std::vector<int> root_to_id(n, -1);
  out.assignment.resize(n);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (root_to_id[r] < 0) root_to_id[r] = out.num_clusters++;
    out.assignment[i] = root_to_id[r];
  }
  return out;
}

double cluster_overlap_metric(const Layout& x, const Clustering& clusters, double r) {
  const int n = x.rows();
  if (static_cast<int>(clusters.assignment.size()) != n)
    throw std::invalid_argument("clustering size mismatch");
  if (n < 2) return 0.0;

  // Rescale to fit the unit square; the radius is only meaningful at a
  // fixed drawing scale.
  double xmin = 1e308, xmax = -1e308, ymin = 1e308, ymax = -1e308;
  for (int i = 0; i < n; ++i) {
    xmin = std::min(xmin, x(i, 0));
    xmax = std::max(xmax, x(i, 0));
    ymin = std::min(ymin, x(i, 1));
    ymax = std::max(ymax, x(i, 1));
  }
  const double extent = std::max(xmax - xmin, ymax - ymin);
  const double scale = extent > 0.0 ? 1.0 / extent : 0.0;

  double total = 0.0;
  int counted = 0;
  for (int i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (int u = 0; u < n; ++u) {
      if (u == i) continue;
      const double dx = (x(u, 0) - x(i, 0)) * scale;
      const double dy = (x(u, 1) - x(i, 1)) * scale;
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (dist >= r) continue;
      const double w = 1.0 - dist;
      den += w;
      if (clusters.assignment[u] != clusters.assignment[i]) num += w;
    }
    if (den > 0.0) {
      total += num / den;
      ++counted;
    }
  }
  return counted > 0 ? total / counted : 0.0;
}

namespace {

template <bool Parallel>
double neighborhood_preservation_impl(const Layout& x, const Graph& g, int k) {
  if (k < 1) throw std::invalid_argument("neighborhood k must be >= 1");
  const int n = g.num_nodes();
  if (n < 2) return 0.0;
  const DistanceMatrix d = Parallel ? all_pairs_bfs(g) : graphlay::serial::all_pairs_bfs(g);

  std::vector<double> iou(n, 0.0);
#pragma omp parallel for schedule(static) if (Parallel)
  for (int i = 0; i < n; ++i) {
    std::vector<char> in_u(n, 0);
    int u_size = 0;
    for (int j = 0; j < n; ++j)
      if (j != i && d(i, j) <= k) {
        in_u[j] = 1;
        ++u_size;
      }
    if (u_size == 0) {
      iou[i] = 1.0;  // no theoretical neighborhood; counts as preserved
      continue;
    }
    // |U| nearest distinct nodes in the drawing, ties by node index.
    std::vector<int> others;
    others.reserve(n - 1);
    for (int j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    std::vector<double> dist(n, 0.0);
    for (int j : others) {
      const double dx = x(i, 0) - x(j, 0);
      const double dy = x(i, 1) - x(j, 1);
      dist[j] = dx * dx + dy * dy;
    }
    std::sort(others.begin(), others.end(), [&](int a, int b) {
      return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
    });
    int inter = 0;
    for (int t = 0; t < u_size; ++t)
      if (in_u[others[t]]) ++inter;
    const int uni = 2 * u_size - inter;
    iou[i] = static_cast<double>(inter) / uni;
  }
  double mean = 0.0;
  for (double v : iou) mean += v;
  return 1.0 - mean / n;
}

}  // namespace

double neighborhood_preservation_metric(const Layout& x, const Graph& g, int k) {
  return neighborhood_preservation_impl<true>(x, g, k);
}

namespace serial {
double neighborhood_preservation_metric(const Layout& x, const Graph& g, int k) {
  return neighborhood_preservation_impl<false>(x, g, k);
}
}  // namespace serial

MetricReport evaluate_all(const Layout& x, const Graph& g, const DistanceMatrix& d,
                          double timing_ms, const MetricOptions& opts) {
  MetricReport r;
  r.stress = stress_metric(x, d, opts.stress_scale);
  r.aspect_ratio = aspect_ratio_metric(x, opts.aspect_rotations);
  r.angular_resolution = angular_resolution_metric(x, g);
  r.crossing_count = static_cast<double>(crossing_count(x, g));
  r.cluster_overlap = cluster_overlap_metric(x, mcl_cluster(g), opts.overlap_radius);
  r.neighborhood_preservation =
      neighborhood_preservation_metric(x, g, opts.neighborhood_k);
  r.execution_time_ms = timing_ms;
  return r;
}

std::string metric_csv_header() {
  return "graph_id,method,stress,aspect_ratio,angular_resolution,crossings,"
         "cluster_overlap,neighborhood_preservation,time_ms,status";
}

std::string metric_csv_row(const std::string& graph_id, const std::string& method,
                           const MetricReport& r, const std::string& status) {
  std::string out = graph_id + "," + method + ",";
  out += format_double(r.stress) + ",";
  out += format_double(r.aspect_ratio) + ",";
  out += format_double(r.angular_resolution) + ",";
  out += format_double(r.crossing_count) + ",";
  out += format_double(r.cluster_overlap) + ",";
  out += format_double(r.neighborhood_preservation) + ",";
  out += format_double(r.execution_time_ms) + ",";
  out += status;
  return out;
}

}  // namespace graphlay
