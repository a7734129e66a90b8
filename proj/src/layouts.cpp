#include "graphlay/layouts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace graphlay {

namespace {

// BFS hop distances from one source.
std::vector<int> bfs_from(const Graph& g, int source) {
  const int n = g.num_nodes();
  std::vector<int> dist(n, -1);
  std::vector<int> queue{source};
  dist[source] = 0;
  for (size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (int w : g.neighbors(u))
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

// Power iteration for the dominant left singular direction of C (n x p),
// operating on C C^T implicitly. `deflate` holds already-found unit
// directions to project out. Returns the singular value; direction in `u`.
double top_singular_direction(const Matrix& c, const std::vector<std::vector<double>>& deflate,
                              Rng& rng, std::vector<double>& u) {
  const int n = c.rows();
  const int p = c.cols();
  u.assign(n, 0.0);
  for (int i = 0; i < n; ++i) u[i] = rng.uniform() - 0.5;
  std::vector<double> tmp(p), v(n);
  double sigma2 = 0.0;
  auto project_out = [&](std::vector<double>& w) {
    for (const auto& d : deflate) {
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += w[i] * d[i];
      for (int i = 0; i < n; ++i) w[i] -= dot * d[i];
    }
  };
  project_out(u);
  double norm = 0.0;
  for (double x : u) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return 0.0;
  for (double& x : u) x /= norm;

  for (int it = 0; it < 200; ++it) {
    // v = C C^T u
    for (int j = 0; j < p; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += c(i, j) * u[i];
      tmp[j] = acc;
    }
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < p; ++j) acc += c(i, j) * tmp[j];
      v[i] = acc;
    }
    project_out(v);
    double rayleigh = 0.0, vnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      rayleigh += u[i] * v[i];
      vnorm += v[i] * v[i];
    }
    vnorm = std::sqrt(vnorm);
    if (vnorm == 0.0) return 0.0;
    const double prev = sigma2;
    sigma2 = rayleigh;
    for (int i = 0; i < n; ++i) u[i] = v[i] / vnorm;
    if (it > 0 && std::abs(sigma2 - prev) <= 1e-7 * std::max(1.0, std::abs(sigma2)))
      break;
  }
  return sigma2 > 0.0 ? std::sqrt(sigma2) : 0.0;
}

}  // namespace

Layout pivot_mds(const Graph& g, int num_pivots, std::uint64_t seed) {
  const int n = g.num_nodes();
  if (num_pivots < 2) throw std::invalid_argument("pivot_mds needs at least 2 pivots");
  const int p = std::min(num_pivots, n);
  Rng rng(stable_seed(seed, "pivot_mds"));

  // Max-min pivot sampling from a seeded start node; ties break to the
  // smallest index.
  std::vector<int> pivots;
  pivots.reserve(p);
  std::vector<int> min_dist(n, 1 << 30);
  Matrix d(n, p);
  int next = rng.uniform_int(n);
  for (int k = 0; k < p; ++k) {
    pivots.push_back(next);
    const std::vector<int> dist = bfs_from(g, next);
    for (int i = 0; i < n; ++i) {
      d(i, k) = static_cast<double>(dist[i]);
      min_dist[i] = std::min(min_dist[i], dist[i]);
    }
    int best = -1, best_val = -1;
    for (int i = 0; i < n; ++i)
      if (min_dist[i] > best_val) {
        best_val = min_dist[i];
        best = i;
      }
    next = best;
  }

  // Double-center the squared distances.
  Matrix c(n, p);
  std::vector<double> row_mean(n, 0.0), col_mean(p, 0.0);
  double grand = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) {
      const double sq = d(i, j) * d(i, j);
      c(i, j) = sq;
      row_mean[i] += sq;
      col_mean[j] += sq;
      grand += sq;
    }
  for (int i = 0; i < n; ++i) row_mean[i] /= p;
  for (int j = 0; j < p; ++j) col_mean[j] /= n;
  grand /= static_cast<double>(n) * p;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j)
      c(i, j) = -0.5 * (c(i, j) - row_mean[i] - col_mean[j] + grand);

  std::vector<std::vector<double>> found;
  std::vector<double> u;
  Layout x(n, 2);
  for (int axis = 0; axis < 2; ++axis) {
    const double sigma = top_singular_direction(c, found, rng, u);
    if (sigma <= 1e-12) break;  // degenerate direction; coordinate stays 0
    for (int i = 0; i < n; ++i) x(i, axis) = sigma * u[i];
    found.push_back(u);
  }
  return x;
}

Layout sgd_stress(const Graph& g, int epochs, std::uint64_t seed) {
  if (epochs < 1) throw std::invalid_argument("sgd_stress needs at least one epoch");
  const int n = g.num_nodes();
  const DistanceMatrix d = all_pairs_bfs(g);
  Rng rng(stable_seed(seed, "sgd_stress"));

  Layout x(n, 2);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform();
    x(i, 1) = rng.uniform();
  }
  if (n < 2) return x;

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  const double dmax = static_cast<double>(d.max_distance());
  const double eta_max = dmax * dmax;
  const double eta_min = 1.0 / 16.0;
  const double decay = epochs > 1 ? std::log(eta_max / eta_min) / (epochs - 1) : 0.0;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double eta = eta_max * std::exp(-decay * epoch);
    rng.shuffle(pairs);
    for (auto [i, j] : pairs) {
      const double delta = static_cast<double>(d(i, j));
      const double w = 1.0 / (delta * delta);
      const double mu = std::min(1.0, w * eta);
      double dx = x(i, 0) - x(j, 0);
      double dy = x(i, 1) - x(j, 1);
      double dist = std::sqrt(dx * dx + dy * dy);
      if (dist == 0.0) {
        const double a = rng.uniform() * 6.283185307179586;
        dx = std::cos(a);
        dy = std::sin(a);
        dist = 1.0;
      }
      const double r = mu * (dist - delta) / 2.0;
      const double rx = r * dx / dist;
      const double ry = r * dy / dist;
      x(i, 0) -= rx;
      x(i, 1) -= ry;
      x(j, 0) += rx;
      x(j, 1) += ry;
    }
  }
  return x;
}

Layout random_layout(int n, std::uint64_t seed) {
  Rng rng(stable_seed(seed, "random_layout"));
  Layout x(n, 2);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform();
    x(i, 1) = rng.uniform();
  }
  return x;
}

namespace {

// One descent stage; returns the best-loss layout seen during the stage.
struct StageResult {
  Layout best;
  double initial_loss = 0.0;
  double best_loss = 0.0;
  bool hit_cap = false;
};

StageResult run_stage(Layout x, const JointP& p, const LossWeights& w,
                      const TsnetOptions& opts, int max_iters, bool stage_one) {
  const int n = x.rows();
  Matrix velocity(n, 2);
  Matrix grad;
  StageResult res;
  res.best = x;
  res.best_loss = 1e308;

  std::vector<double> window;
  window.reserve(max_iters + 1);

  int it = 0;
  bool stopped_early = false;
  for (; it < max_iters; ++it) {
    const double loss = loss_and_gradient(x, p, w, grad);
    if (it == 0) res.initial_loss = loss;
    if (loss < res.best_loss) {
      res.best_loss = loss;
      res.best = x;
    }
    window.push_back(loss);
    const int lag = opts.tol_window;
    if (static_cast<int>(window.size()) > lag) {
      const double then = window[window.size() - 1 - lag];
      if (std::abs(then - loss) < opts.rel_tol * std::max(1.0, std::abs(loss))) {
        stopped_early = true;
        break;
      }
    }
    const double m = (stage_one && it < opts.momentum_switch_iter)
                         ? opts.momentum_early
                         : opts.momentum_late;
    double gnorm = 0.0;
    for (size_t k = 0; k < grad.size(); ++k) gnorm += grad.data()[k] * grad.data()[k];
    gnorm = std::sqrt(gnorm);
    const double scale = gnorm > opts.grad_clip ? opts.grad_clip / gnorm : 1.0;
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 2; ++c) {
        velocity(i, c) = m * velocity(i, c) - opts.learning_rate * scale * grad(i, c);
        x(i, c) += velocity(i, c);
      }
  }
  const double final_loss = full_loss(x, p, w);
  if (final_loss < res.best_loss) {
    res.best_loss = final_loss;
    res.best = std::move(x);
  }
  res.hit_cap = !stopped_early && it == max_iters;
  return res;
}

}  // namespace

TsnetResult tsnet_layout(const Graph& g, const Schedule& sched, std::uint64_t seed,
                         const TsnetOptions& opts) {
  const int n = g.num_nodes();
  const DistanceMatrix d = all_pairs_bfs(g);
  const double perp =
      opts.perplexity > 0.0 ? opts.perplexity : default_perplexity(n, opts.n_max);
  const JointP p = joint_p(d, perp);

  Layout x;
  if (sched.variant == ScheduleVariant::tsnet_star) {
    x = pivot_mds(g, std::min(50, n), stable_seed(seed, "tsnet_init"));
    // Rescale to unit RMS radius so stage-1 compression starts at the same
    // scale as a random init.
    double ms = 0.0;
    for (int i = 0; i < n; ++i) ms += x(i, 0) * x(i, 0) + x(i, 1) * x(i, 1);
    ms = std::sqrt(ms / n);
    if (ms > 0.0)
      for (size_t k = 0; k < x.size(); ++k) x.data()[k] /= ms;
  } else {
    Rng rng(stable_seed(seed, "tsnet_init"));
    x = Layout(n, 2);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = rng.uniform();
      x(i, 1) = rng.uniform();
    }
  }

  TsnetResult out;
  StageResult s1 = run_stage(std::move(x), p, sched.stage1, opts,
                             opts.stage1_max_iters, true);
  out.stage1_initial_loss = s1.initial_loss;
  out.stage1_final_loss = s1.best_loss;
  StageResult s2 = run_stage(std::move(s1.best), p, sched.stage2, opts,
                             opts.stage2_max_iters, false);
  out.stage2_final_loss = s2.best_loss;
  out.converged = !(s1.hit_cap || s2.hit_cap);
  out.layout = std::move(s2.best);
  return out;
}

std::string layout_to_csv(const Graph& g, const Layout& x) {
  if (x.rows() != g.num_nodes() || x.cols() != 2)
    throw std::invalid_argument("layout shape does not match graph");
  std::string out = "node_id,x,y\n";
  for (int i = 0; i < x.rows(); ++i) {
    out += g.label(i);
    out += ',';
    out += format_double(x(i, 0));
    out += ',';
    out += format_double(x(i, 1));
    out += '\n';
  }
  return out;
}

void write_layout_csv(const Graph& g, const Layout& x, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write layout file: " + path);
  f << layout_to_csv(g, x);
}

Layout read_layout_csv(const Graph& g, std::istream& in) {
  std::map<std::string, int> index;
  for (int i = 0; i < g.num_nodes(); ++i) index[g.label(i)] = i;
  Layout x(g.num_nodes(), 2);
  std::vector<char> seen(g.num_nodes(), 0);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "node_id,x,y") continue;
    std::istringstream ls(line);
    std::string id, xs, ys;
    if (!std::getline(ls, id, ',') || !std::getline(ls, xs, ',') ||
        !std::getline(ls, ys))
      throw ParseError("layout line " + std::to_string(line_no) +
                       ": expected \"node_id,x,y\"");
    const auto it = index.find(id);
    if (it == index.end())
      throw InputError("layout references unknown node id \"" + id + "\"");
    char* endx = nullptr;
    char* endy = nullptr;
    const double vx = std::strtod(xs.c_str(), &endx);
    const double vy = std::strtod(ys.c_str(), &endy);
    if (endx == xs.c_str() || endy == ys.c_str())
      throw ParseError("layout line " + std::to_string(line_no) +
                       ": malformed coordinate");
    x(it->second, 0) = vx;
    x(it->second, 1) = vy;
    seen[it->second] = 1;
  }
  std::string missing;
  for (int i = 0; i < g.num_nodes(); ++i)
    if (!seen[i]) missing += (missing.empty() ? "" : ", ") + g.label(i);
  if (!missing.empty())
    throw InputError("layout is missing node ids: " + missing);
  return x;
}

Layout read_layout_csv_file(const Graph& g, const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open layout file: " + path);
  return read_layout_csv(g, f);
}

}  // namespace graphlay
