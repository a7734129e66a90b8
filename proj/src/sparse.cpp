#include "graphlay/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graphlay {

SparseMatrix SparseMatrix::from_entries(int n, std::vector<Entry> entries) {
  for (const Entry& e : entries) {
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
      throw std::invalid_argument("sparse entry index out of range");
    if (!std::isfinite(e.value))
      throw std::invalid_argument("sparse entry value not finite");
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.n_ = n;
  m.row_ptr_.assign(n + 1, 0);
  size_t i = 0;
  while (i < entries.size()) {
    double v = entries[i].value;
    size_t j = i + 1;
    while (j < entries.size() && entries[j].row == entries[i].row &&
           entries[j].col == entries[i].col) {
      v += entries[j].value;
      ++j;
    }
    if (v != 0.0) {
      m.col_.push_back(entries[i].col);
      m.val_.push_back(v);
      ++m.row_ptr_[entries[i].row + 1];
    }
    i = j;
  }
  for (int r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<Entry> e;
  e.reserve(n);
  for (int i = 0; i < n; ++i) e.push_back({i, i, 1.0});
  return from_entries(n, std::move(e));
}

std::vector<SparseMatrix::Entry> SparseMatrix::entries() const {
  std::vector<Entry> out;
  out.reserve(col_.size());
  for (int r = 0; r < n_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      out.push_back({r, col_[k], val_[k]});
  return out;
}

void SparseMatrix::multiply(const double* x, double* y) const {
  for (int r = 0; r < n_; ++r) {
    double acc = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += val_[k] * x[col_[k]];
    y[r] = acc;
  }
}

Matrix SparseMatrix::multiply(const Matrix& x) const {
  if (x.rows() != n_) throw std::invalid_argument("sparse-dense shape mismatch");
  const int f = x.cols();
  Matrix out(n_, f);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < n_; ++r) {
    double* orow = out.row(r);
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double v = val_[k];
      const double* xrow = x.row(col_[k]);
      for (int c = 0; c < f; ++c) orow[c] += v * xrow[c];
    }
  }
  return out;
}

Matrix SparseMatrix::multiply_transposed(const Matrix& x) const {
  if (x.rows() != n_) throw std::invalid_argument("sparse-dense shape mismatch");
  const int f = x.cols();
  Matrix out(n_, f);
  for (int r = 0; r < n_; ++r) {
    const double* xrow = x.row(r);
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      double* orow = out.row(col_[k]);
      const double v = val_[k];
      for (int c = 0; c < f; ++c) orow[c] += v * xrow[c];
    }
  }
  return out;
}

SparseMatrix SparseMatrix::multiply(const SparseMatrix& other, double prune) const {
  if (other.n_ != n_) throw std::invalid_argument("sparse-sparse shape mismatch");
  std::vector<Entry> out;
  std::vector<double> acc(n_, 0.0);
  std::vector<int> touched;
  touched.reserve(64);
  for (int r = 0; r < n_; ++r) {
    touched.clear();
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const int mid = col_[k];
      const double v = val_[k];
      for (int k2 = other.row_ptr_[mid]; k2 < other.row_ptr_[mid + 1]; ++k2) {
        const int c = other.col_[k2];
        if (acc[c] == 0.0) touched.push_back(c);
        acc[c] += v * other.val_[k2];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int c : touched) {
      if (std::abs(acc[c]) > prune) out.push_back({r, c, acc[c]});
      acc[c] = 0.0;
    }
  }
  return from_entries(n_, std::move(out));
}

SparseMatrix SparseMatrix::add_scaled(double a, const SparseMatrix& other,
                                      double b) const {
  if (other.n_ != n_) throw std::invalid_argument("sparse-sparse shape mismatch");
  std::vector<Entry> out;
  out.reserve(col_.size() + other.col_.size());
  for (int r = 0; r < n_; ++r) {
    int i = row_ptr_[r], iend = row_ptr_[r + 1];
    int j = other.row_ptr_[r], jend = other.row_ptr_[r + 1];
    while (i < iend || j < jend) {
      int ci = i < iend ? col_[i] : n_;
      int cj = j < jend ? other.col_[j] : n_;
      if (ci < cj) {
        out.push_back({r, ci, a * val_[i++]});
      } else if (cj < ci) {
        out.push_back({r, cj, b * other.val_[j++]});
      } else {
        const double v = a * val_[i++] + b * other.val_[j++];
        if (v != 0.0) out.push_back({r, ci, v});
      }
    }
  }
  return from_entries(n_, std::move(out));
}

Matrix SparseMatrix::to_dense() const {
  Matrix m(n_, n_);
  for (int r = 0; r < n_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) m(r, col_[k]) = val_[k];
  return m;
}

SparseMatrix normalized_laplacian(int num_nodes,
                                  const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> degree(num_nodes, 0);
  for (auto [u, v] : edges) {
    ++degree[u];
    ++degree[v];
  }
  std::vector<SparseMatrix::Entry> entries;
  entries.reserve(edges.size() * 2 + num_nodes);
  for (int i = 0; i < num_nodes; ++i)
    if (degree[i] > 0) entries.push_back({i, i, 1.0});
  for (auto [u, v] : edges) {
    const double w = -1.0 / std::sqrt(static_cast<double>(degree[u]) * degree[v]);
    entries.push_back({u, v, w});
    entries.push_back({v, u, w});
  }
  return SparseMatrix::from_entries(num_nodes, std::move(entries));
}

SparseMatrix normalized_laplacian(const Graph& g) {
  if (g.num_nodes() < 2)
    throw std::invalid_argument("normalized_laplacian requires N >= 2");
  return normalized_laplacian(g.num_nodes(), g.edges());
}

LambdaMaxResult lambda_max(const SparseMatrix& l) {
  const int n = l.n();
  LambdaMaxResult res;
  if (n == 0) return res;
  // Deterministic pseudo-random start vector; an all-ones start would be
  // exactly the null vector of bipartite Laplacians.
  std::vector<double> v(n), w(n);
  double norm = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = (splitmix64(0x9d2c5681u ^ static_cast<std::uint64_t>(i)) >> 11) * 0x1.0p-53 - 0.5;
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;

  double lambda = 0.0;
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    l.multiply(v.data(), w.data());
    double rayleigh = 0.0, wnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      rayleigh += v[i] * w[i];
      wnorm += w[i] * w[i];
    }
    wnorm = std::sqrt(wnorm);
    if (wnorm == 0.0) {  // null matrix
      res.value = 0.0;
      return res;
    }
    const double prev = lambda;
    lambda = rayleigh;
    for (int i = 0; i < n; ++i) v[i] = w[i] / wnorm;
    if (it > 0 && std::abs(lambda - prev) <= 1e-7 * std::max(1.0, std::abs(lambda))) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    res.converged = false;
    res.value = 2.0;  // valid upper bound for a normalized Laplacian
    return res;
  }
  res.value = std::min(2.0, std::max(0.0, lambda));
  return res;
}

SparseMatrix rescaled_laplacian(const SparseMatrix& l, double lam) {
  if (!(lam > 0.0)) throw std::invalid_argument("lambda_max must be positive");
  return l.add_scaled(2.0 / lam, SparseMatrix::identity(l.n()), -1.0);
}

ChebyshevFilters chebyshev_filters(const SparseMatrix& lt, int k_order) {
  if (k_order < 0) throw std::invalid_argument("Chebyshev order must be >= 0");
  constexpr double kPrune = 1e-12;
  ChebyshevFilters out;
  out.order = k_order;
  out.filters.reserve(k_order + 1);
  out.filters.push_back(SparseMatrix::identity(lt.n()));
  if (k_order >= 1) out.filters.push_back(lt);
  for (int k = 2; k <= k_order; ++k) {
    // T_k = 2 L~ T_{k-1} - T_{k-2}
    SparseMatrix prod = lt.multiply(out.filters[k - 1], kPrune);
    out.filters.push_back(prod.add_scaled(2.0, out.filters[k - 2], -1.0));
  }
  return out;
}

Matrix apply_filter(const SparseMatrix& t, const Matrix& x) { return t.multiply(x); }

namespace serial {

Matrix apply_filter(const SparseMatrix& t, const Matrix& x) {
  if (x.rows() != t.n()) throw std::invalid_argument("sparse-dense shape mismatch");
  const int f = x.cols();
  Matrix out(t.n(), f);
  const auto& rp = t.row_ptr();
  const auto& cols = t.cols();
  const auto& vals = t.values();
  for (int r = 0; r < t.n(); ++r) {
    double* orow = out.row(r);
    for (int k = rp[r]; k < rp[r + 1]; ++k) {
      const double v = vals[k];
      const double* xrow = x.row(cols[k]);
      for (int c = 0; c < f; ++c) orow[c] += v * xrow[c];
    }
  }
  return out;
}

}  // namespace serial

SparseMatrix permute_sparse(const SparseMatrix& m, const std::vector<int>& perm,
                            int new_n) {
  std::vector<SparseMatrix::Entry> entries = m.entries();
  for (auto& e : entries) {
    e.row = perm[e.row];
    e.col = perm[e.col];
  }
  return SparseMatrix::from_entries(new_n, std::move(entries));
}

}  // namespace graphlay
