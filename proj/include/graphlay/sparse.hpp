#pragma once

#include <vector>

#include "graphlay/core.hpp"
#include "graphlay/graph.hpp"

namespace graphlay {

/// Square sparse matrix in CSR form with entries kept in canonical
/// (row, col) order. All construction paths sort, merge duplicates and
/// drop explicit zeros.
class SparseMatrix {
 public:
  struct Entry {
    int row;
    int col;
    double value;
  };

  SparseMatrix() = default;
  static SparseMatrix from_entries(int n, std::vector<Entry> entries);
  static SparseMatrix identity(int n);

  int n() const { return n_; }
  int nnz() const { return static_cast<int>(col_.size()); }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return col_; }
  const std::vector<double>& values() const { return val_; }

  std::vector<Entry> entries() const;

  /// y = this * x for a dense vector.
  void multiply(const double* x, double* y) const;

  /// out = this * x for a dense n x f matrix (row-parallel).
  Matrix multiply(const Matrix& x) const;

  /// out = transpose(this) * x.
  Matrix multiply_transposed(const Matrix& x) const;

  /// Sparse-sparse product with pruning of magnitudes below `prune`.
  SparseMatrix multiply(const SparseMatrix& other, double prune) const;

  /// this * a + other * b entrywise merge, pruning exact zeros.
  SparseMatrix add_scaled(double a, const SparseMatrix& other, double b) const;

  Matrix to_dense() const;

 private:
  int n_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_;
  std::vector<double> val_;
};

/// Symmetric normalized Laplacian I - D^{-1/2} A D^{-1/2}.
/// Rows of isolated nodes are zero (relevant for padded graphs).
SparseMatrix normalized_laplacian(const Graph& g);
SparseMatrix normalized_laplacian(int num_nodes,
                                  const std::vector<std::pair<int, int>>& edges);

struct LambdaMaxResult {
  double value = 0.0;
  bool converged = true;
};

/// Largest eigenvalue of a symmetric PSD matrix by power iteration
/// (max 200 iterations, relative tolerance 1e-7), clamped to [0, 2].
/// Falls back to 2 when the iteration does not converge.
LambdaMaxResult lambda_max(const SparseMatrix& l);

/// L~ = (2/lam) L - I. Requires lam > 0.
SparseMatrix rescaled_laplacian(const SparseMatrix& l, double lam);

/// Chebyshev polynomial filters T_0..T_K of the rescaled Laplacian.
struct ChebyshevFilters {
  int order = 0;  // K
  std::vector<SparseMatrix> filters;  // size K+1, filters[k] = T_k(L~)
};

ChebyshevFilters chebyshev_filters(const SparseMatrix& lt, int k_order);

/// Sparse-dense product T * X; row-parallel.
Matrix apply_filter(const SparseMatrix& t, const Matrix& x);

namespace serial {
Matrix apply_filter(const SparseMatrix& t, const Matrix& x);
}

/// Applies a node relabeling: entry (i,j) moves to (perm[i], perm[j]).
SparseMatrix permute_sparse(const SparseMatrix& m, const std::vector<int>& perm,
                            int new_n);

}  // namespace graphlay
