#pragma once

#include <functional>
#include <vector>

#include "graphlay/core.hpp"
#include "graphlay/sparse.hpp"
#include "graphlay/tsne.hpp"

namespace graphlay::ad {

/// Handle to a node on a Tape.
struct Var {
  int id = -1;
};

/// Reverse-mode tape over dense matrices. Operations record their local
/// gradients as closures; backward() replays them in exact reverse order,
/// accumulating additively at fan-out. One tape per training step.
class Tape {
 public:
  /// New leaf holding `value`. Leaves with requires_grad participate in
  /// backward(); constants do not.
  Var leaf(Matrix value, bool requires_grad);
  Var constant(Matrix value) { return leaf(std::move(value), false); }

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  Var matmul(Var a, Var b);
  /// Elementwise add; b may also be a 1 x cols row vector (bias).
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var concat_cols(const std::vector<Var>& parts);
  Var relu(Var a);
  /// Rows divided by their L2 norm (norm floored at `floor`).
  Var row_l2_normalize(Var a, double floor = 1e-8);
  /// Zeroes rows where mask is 0. `mask` has one entry per row.
  Var mask_rows(Var a, std::vector<double> mask);
  Var sum_all(Var a);   // 1x1
  Var mean_all(Var a);  // 1x1
  Var add_scalar(Var a, double c);
  Var scale(Var a, double c);
  Var log(Var a);
  Var exp(Var a);
  Var square(Var a);
  Var reciprocal(Var a);
  /// N x 2 positions -> N x N matrix of squared pairwise distances.
  Var pairwise_sq_distances(Var a);
  /// Constant sparse matrix times tape tensor.
  Var sparse_matmul(const SparseMatrix& s, Var x);
  /// Selects rows in the given order (backward scatters).
  Var gather_rows(Var a, std::vector<int> rows);
  /// Fused layout loss: forward value is exactly tsne full_loss on the
  /// N x 2 input; backward applies the analytic loss_gradient.
  Var tsnet_loss(Var x, const JointP& p, const LossWeights& w);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every requires-grad leaf.
  /// `loss` must be scalar (1x1).
  void backward(Var loss);

  size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backprop;  // empty for leaves
  };

  Var record(Matrix value, bool requires_grad, std::function<void(Tape&)> backprop);
  Matrix& grad_ref(Var v) { return nodes_[v.id].grad; }
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }

  std::vector<Node> nodes_;
};

/// Adam optimizer state for one parameter tensor.
struct AdamState {
  Matrix m;  // first moment
  Matrix v;  // second moment
  long long t = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Standard Adam update with bias correction, in place.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state,
               const AdamConfig& cfg);

/// Dense matmul helpers used by the tape (row-parallel, deterministic).
Matrix dense_matmul(const Matrix& a, const Matrix& b);
Matrix dense_matmul_transA(const Matrix& a, const Matrix& b);  // a^T b
Matrix dense_matmul_transB(const Matrix& a, const Matrix& b);  // a b^T

namespace serial {
Matrix dense_matmul(const Matrix& a, const Matrix& b);
}

}  // namespace graphlay::ad
