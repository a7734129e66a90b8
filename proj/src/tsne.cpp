#include "graphlay/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graphlay {

namespace {

constexpr double kLn2 = 0.6931471805599453094172321214581766;
constexpr double kProbFloor = 1e-300;

// Perplexity of the conditional row of node `self` at bandwidth sigma,
// log-sum-exp stabilized. Row entries are exp(-d^2 / 2 sigma^2) normalized
// over j != self.
double row_perplexity(const DistanceMatrix& d, int self, double sigma) {
  const int n = d.n();
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double max_e = -1e308;
  for (int j = 0; j < n; ++j) {
    if (j == self) continue;
    const double dd = static_cast<double>(d(self, j));
    max_e = std::max(max_e, -dd * dd * inv);
  }
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == self) continue;
    const double dd = static_cast<double>(d(self, j));
    sum += std::exp(-dd * dd * inv - max_e);
  }
  const double log_sum = std::log(sum);
  // H = -sum p log2 p with log2 p = (e - max_e - log_sum) / ln 2.
  double h = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == self) continue;
    const double dd = static_cast<double>(d(self, j));
    const double e = -dd * dd * inv - max_e;
    const double p = std::exp(e) / sum;
    if (p > 0.0) h -= p * ((e - log_sum) / kLn2);
  }
  return std::exp2(h);
}

double calibrate_one(const DistanceMatrix& d, int self, double target,
                     double& achieved) {
  constexpr double kLo = 1e-4;
  constexpr double kHi = 1e4;
  constexpr double kTol = 1e-4;
  double lo = kLo, hi = kHi;
  const double k_lo = row_perplexity(d, self, lo);
  if (k_lo >= target) {  // unreachable from below; clamp at the bound
    achieved = k_lo;
    return lo;
  }
  const double k_hi = row_perplexity(d, self, hi);
  if (k_hi <= target) {
    achieved = k_hi;
    return hi;
  }
  double mid = lo, k_mid = k_lo;
  for (int it = 0; it < 60; ++it) {
    mid = 0.5 * (lo + hi);
    k_mid = row_perplexity(d, self, mid);
    if (std::abs(k_mid - target) <= kTol) break;
    if (k_mid > target)
      hi = mid;
    else
      lo = mid;
  }
  achieved = k_mid;
  return mid;
}

SigmaCalibration calibrate_impl(const DistanceMatrix& d, double target,
                                bool parallel) {
  const int n = d.n();
  if (!(target > 1.0)) throw std::invalid_argument("perplexity target must exceed 1");
  SigmaCalibration out;
  out.effective_target = target;
  if (target > n - 1 - 1e-3) {
    out.effective_target = n - 1 - 1e-3;
    out.target_clamped_high = true;
  }
  out.sigmas.resize(n);
  out.achieved.resize(n);
  out.clamped.assign(n, 0);
  const double t = out.effective_target;
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i)
      out.sigmas[i] = calibrate_one(d, i, t, out.achieved[i]);
  } else {
    for (int i = 0; i < n; ++i)
      out.sigmas[i] = calibrate_one(d, i, t, out.achieved[i]);
  }
  for (int i = 0; i < n; ++i)
    if (std::abs(out.achieved[i] - t) > 1e-3) out.clamped[i] = 1;
  return out;
}

}  // namespace

std::vector<double> conditional_p(const std::vector<double>& delta_row, int self,
                                  double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const int n = static_cast<int>(delta_row.size());
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double max_e = -1e308;
  for (int j = 0; j < n; ++j) {
    if (j == self) continue;
    max_e = std::max(max_e, -delta_row[j] * delta_row[j] * inv);
  }
  std::vector<double> p(n, 0.0);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == self) continue;
    p[j] = std::exp(-delta_row[j] * delta_row[j] * inv - max_e);
    sum += p[j];
  }
  for (int j = 0; j < n; ++j)
    if (j != self) p[j] /= sum;
  return p;
}

double perplexity(const std::vector<double>& p_row) {
  double h = 0.0;
  for (double p : p_row)
    if (p > 0.0) h -= p * (std::log(p) / kLn2);
  return std::exp2(h);
}

SigmaCalibration calibrate_sigmas(const DistanceMatrix& d, double target) {
  return calibrate_impl(d, target, true);
}

namespace serial {
SigmaCalibration calibrate_sigmas(const DistanceMatrix& d, double target) {
  return calibrate_impl(d, target, false);
}
}  // namespace serial

double default_perplexity(int n, int n_max) {
  if (n < 2) throw std::invalid_argument("graph too small for a perplexity");
  double v = n / 3.0;
  v = std::clamp(v, 5.0, n_max / 2.0);
  v = std::min(v, static_cast<double>(n - 2));
  // The rule above yields <= 1 for n <= 3, outside calibrate's domain.
  return std::max(v, 1.001);
}

JointP joint_p(const DistanceMatrix& d, double target) {
  const int n = d.n();
  SigmaCalibration cal = calibrate_sigmas(d, target);
  Matrix cond(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(n);
    for (int j = 0; j < n; ++j) row[j] = static_cast<double>(d(i, j));
    std::vector<double> p = conditional_p(row, i, cal.sigmas[i]);
    for (int j = 0; j < n; ++j) cond(i, j) = p[j];
  }
  JointP out;
  out.n = n;
  out.p = Matrix(n, n);
  const double scale = 1.0 / (2.0 * n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = (cond(i, j) + cond(j, i)) * scale;
      out.p(i, j) = v;
      out.p(j, i) = v;
    }
  out.sigmas = std::move(cal.sigmas);
  out.target_perplexity = cal.effective_target;
  for (char c : cal.clamped) out.any_clamped |= (c != 0);
  return out;
}

namespace {

// Student-t kernel matrix K_ij = (1 + ||x_i - x_j||^2)^{-1}, zero diagonal,
// plus its total over ordered pairs. Row partials are summed in index order
// so parallel and serial paths agree bitwise.
struct KernelParts {
  Matrix k;
  double total = 0.0;
};

template <bool Parallel>
KernelParts student_kernel(const Matrix& x) {
  const int n = x.rows();
  KernelParts out;
  out.k = Matrix(n, n);
  std::vector<double> row_sum(n, 0.0);
#pragma omp parallel for schedule(static) if (Parallel)
  for (int i = 0; i < n; ++i) {
    const double xi = x(i, 0), yi = x(i, 1);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = xi - x(j, 0);
      const double dy = yi - x(j, 1);
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      out.k(i, j) = v;
      acc += v;
    }
    row_sum[i] = acc;
  }
  for (int i = 0; i < n; ++i) out.total += row_sum[i];
  return out;
}

void check_layout(const Matrix& x) {
  if (x.cols() != 2) throw std::invalid_argument("layout must be N x 2");
  for (size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x.data()[i]))
      throw std::invalid_argument("layout has non-finite coordinates");
}

// Shared value/gradient evaluation. When `grad` is non-null it receives the
// analytic gradient; the loss accumulation is identical either way.
template <bool Parallel>
double loss_impl(const Matrix& x, const JointP& p, const LossWeights& w,
                 Matrix* grad) {
  check_layout(x);
  const int n = x.rows();
  if (p.n != n && w.lambda_kl != 0.0)
    throw std::invalid_argument("joint_p size does not match layout");
  const bool want_kl = w.lambda_kl != 0.0;
  const bool want_rep = w.lambda_r != 0.0;

  KernelParts kp;
  double inv_z = 0.0;
  if (want_kl) {
    kp = student_kernel<Parallel>(x);
    inv_z = 1.0 / kp.total;
  }
  if (grad) *grad = Matrix(n, 2);

  std::vector<double> kl_rows(want_kl ? n : 0, 0.0);
  std::vector<double> comp_rows(n, 0.0);
  std::vector<double> rep_rows(want_rep ? n : 0, 0.0);

#pragma omp parallel for schedule(static) if (Parallel)
  for (int i = 0; i < n; ++i) {
    const double xi = x(i, 0), yi = x(i, 1);
    comp_rows[i] = xi * xi + yi * yi;
    double kl_acc = 0.0, rep_acc = 0.0;
    double gkx = 0.0, gky = 0.0, grx = 0.0, gry = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = xi - x(j, 0);
      const double dy = yi - x(j, 1);
      if (want_kl) {
        const double kij = kp.k(i, j);
        const double qij = kij * inv_z;
        const double pij = p.p(i, j);
        if (pij > 0.0)
          kl_acc += pij * std::log(pij / std::max(qij, kProbFloor));
        if (grad) {
          const double f = (pij - qij) * kij;
          gkx += f * dx;
          gky += f * dy;
        }
      }
      if (want_rep) {
        const double dist = std::sqrt(dx * dx + dy * dy);
        rep_acc += std::log(dist + w.eps_r);
        if (grad && dist > 0.0) {
          const double f = 1.0 / (dist * (dist + w.eps_r));
          grx += f * dx;
          gry += f * dy;
        }
      }
    }
    if (want_kl) kl_rows[i] = kl_acc;
    if (want_rep) rep_rows[i] = rep_acc;
    if (grad) {
      double gx = (w.lambda_c / n) * xi;
      double gy = (w.lambda_c / n) * yi;
      if (want_kl) {
        gx += 4.0 * w.lambda_kl * gkx;
        gy += 4.0 * w.lambda_kl * gky;
      }
      if (want_rep) {
        const double s = w.lambda_r / (static_cast<double>(n) * n);
        gx -= s * grx;
        gy -= s * gry;
      }
      (*grad)(i, 0) = gx;
      (*grad)(i, 1) = gy;
    }
  }

  double kl = 0.0, comp = 0.0, rep = 0.0;
  for (int i = 0; i < n; ++i) {
    if (want_kl) kl += kl_rows[i];
    comp += comp_rows[i];
    if (want_rep) rep += rep_rows[i];
  }
  double total = w.lambda_c / (2.0 * n) * comp;
  if (want_kl) total += w.lambda_kl * kl;
  if (want_rep) total -= w.lambda_r / (2.0 * static_cast<double>(n) * n) * rep;
  return total;
}

}  // namespace

Matrix joint_q(const Matrix& x) {
  check_layout(x);
  if (x.rows() < 2) throw std::invalid_argument("joint_q requires N >= 2");
  KernelParts kp = student_kernel<true>(x);
  const double inv_z = 1.0 / kp.total;
  const int n = x.rows();
  Matrix q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i) q(i, j) = kp.k(i, j) * inv_z;
  return q;
}

namespace serial {
Matrix joint_q(const Matrix& x) {
  check_layout(x);
  KernelParts kp = student_kernel<false>(x);
  const double inv_z = 1.0 / kp.total;
  const int n = x.rows();
  Matrix q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i) q(i, j) = kp.k(i, j) * inv_z;
  return q;
}
}  // namespace serial

double kl_cost(const Matrix& p, const Matrix& q) {
  if (!p.same_shape(q)) throw std::invalid_argument("p and q shapes differ");
  const int n = p.rows();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double pij = p(i, j);
      if (pij > 0.0) acc += pij * std::log(pij / std::max(q(i, j), kProbFloor));
    }
    total += acc;
  }
  return total;
}

double full_loss(const Matrix& x, const JointP& p, const LossWeights& w) {
  return loss_impl<true>(x, p, w, nullptr);
}

Matrix loss_gradient(const Matrix& x, const JointP& p, const LossWeights& w) {
  Matrix g;
  loss_impl<true>(x, p, w, &g);
  return g;
}

double loss_and_gradient(const Matrix& x, const JointP& p, const LossWeights& w,
                         Matrix& grad_out) {
  return loss_impl<true>(x, p, w, &grad_out);
}

namespace serial {

double full_loss(const Matrix& x, const JointP& p, const LossWeights& w) {
  return loss_impl<false>(x, p, w, nullptr);
}

Matrix loss_gradient(const Matrix& x, const JointP& p, const LossWeights& w) {
  Matrix g;
  loss_impl<false>(x, p, w, &g);
  return g;
}

}  // namespace serial

}  // namespace graphlay
