#pragma once

#include <vector>

#include "graphlay/core.hpp"
#include "graphlay/graph.hpp"

namespace graphlay {

/// Loss term weights (lambda_kl, lambda_c, lambda_r) and the repulsion
/// regularization constant.
struct LossWeights {
  double lambda_kl = 1.0;
  double lambda_c = 0.0;
  double lambda_r = 0.0;
  double eps_r = 0.05;
};

enum class ScheduleVariant { tsnet, tsnet_star };

/// Two-stage weight schedule. Stage 2 is (1, 0.01, 0.6) for both variants;
/// stage 1 is (1, 1.2, 0) for tsnet and (1, 0.1, 0) for tsnet_star.
struct Schedule {
  ScheduleVariant variant = ScheduleVariant::tsnet;
  LossWeights stage1;
  LossWeights stage2;

  static Schedule tsnet() {
    return {ScheduleVariant::tsnet, {1.0, 1.2, 0.0}, {1.0, 0.01, 0.6}};
  }
  static Schedule tsnet_star() {
    return {ScheduleVariant::tsnet_star, {1.0, 0.1, 0.0}, {1.0, 0.01, 0.6}};
  }
};

/// Symmetrized neighborhood probabilities p_ij with the calibrated
/// per-node bandwidths that produced them.
struct JointP {
  int n = 0;
  Matrix p;                    // n x n, symmetric, zero diagonal, sums to 1
  std::vector<double> sigmas;  // per-node bandwidth
  double target_perplexity = 0.0;
  bool any_clamped = false;    // some node's target was unreachable
};

/// One conditional row p_{.|i}: entry j is the probability that j is a
/// neighbor of i under a Gaussian on graph distances with bandwidth sigma.
/// Self entry is zero; the row sums to 1 (log-sum-exp stabilized).
std::vector<double> conditional_p(const std::vector<double>& delta_row, int self,
                                  double sigma);

/// kappa = 2^{-sum_j p_j log2 p_j}, with 0 log 0 = 0.
double perplexity(const std::vector<double>& p_row);

struct SigmaCalibration {
  std::vector<double> sigmas;
  std::vector<double> achieved;   // perplexity reached per node
  std::vector<char> clamped;      // 1 where the target was unreachable
  bool target_clamped_high = false;  // target > N-1 was clamped globally
  double effective_target = 0.0;
};

/// Binary search (<= 60 iterations, tolerance 1e-4) for per-node sigma in
/// [1e-4, 1e4]. Targets above N-1 are clamped to N-1 - 1e-3; targets below
/// a node's reachable minimum (the multiplicity of its nearest distance)
/// clamp at the lower search bound. Per-node searches run in parallel.
SigmaCalibration calibrate_sigmas(const DistanceMatrix& d, double target_perplexity);

namespace serial {
SigmaCalibration calibrate_sigmas(const DistanceMatrix& d, double target_perplexity);
}

/// Per-graph perplexity default: clamp(n/3, 5, n_max/2), then <= n-2.
double default_perplexity(int n, int n_max);

/// p_ij = (p_{i|j} + p_{j|i}) / 2N over the calibrated conditionals.
JointP joint_p(const DistanceMatrix& d, double target_perplexity);

/// Student-t joint probabilities of the layout:
/// q_ij = (1+||X_i-X_j||^2)^{-1} / sum_{k != l} (1+||X_k-X_l||^2)^{-1}.
Matrix joint_q(const Matrix& x);

namespace serial {
Matrix joint_q(const Matrix& x);
}

/// KL divergence sum_{i != j} p log(p/q), natural log, 0 log 0 = 0,
/// q floored at 1e-300.
double kl_cost(const Matrix& p, const Matrix& q);

/// C = l_kl C_KL + (l_c / 2N) sum ||X_i||^2
///       - (l_r / 2N^2) sum_{i != j} log(||X_i - X_j|| + eps_r).
double full_loss(const Matrix& x, const JointP& p, const LossWeights& w);

/// Analytic gradient of full_loss, N x 2.
Matrix loss_gradient(const Matrix& x, const JointP& p, const LossWeights& w);

/// One-pass value + gradient sharing the q computation; bit-identical to
/// the separate calls.
double loss_and_gradient(const Matrix& x, const JointP& p, const LossWeights& w,
                         Matrix& grad_out);

namespace serial {
double full_loss(const Matrix& x, const JointP& p, const LossWeights& w);
Matrix loss_gradient(const Matrix& x, const JointP& p, const LossWeights& w);
}

}  // namespace graphlay
