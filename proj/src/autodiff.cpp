#include "graphlay/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace graphlay::ad {

namespace {

void accumulate(Matrix& dst, const Matrix& src) {
  for (size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

}  // namespace

Matrix dense_matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul shape mismatch");
  Matrix out(a.rows(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double* orow = out.row(i);
    const double* arow = a.row(i);
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.row(p);
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Matrix dense_matmul_transA(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul shape mismatch");
  Matrix out(a.cols(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < k; ++i) {
    double* orow = out.row(i);
    for (int p = 0; p < n; ++p) {
      const double av = a(p, i);
      if (av == 0.0) continue;
      const double* brow = b.row(p);
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Matrix dense_matmul_transB(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul shape mismatch");
  Matrix out(a.rows(), b.rows());
  const int n = a.rows(), k = a.cols(), m = b.rows();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double* orow = out.row(i);
    const double* arow = a.row(i);
    for (int j = 0; j < m; ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      orow[j] = acc;
    }
  }
  return out;
}

namespace serial {
Matrix dense_matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double* orow = out.row(i);
    const double* arow = a.row(i);
    for (int p = 0; p < a.cols(); ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.row(p);
      for (int j = 0; j < b.cols(); ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}
}  // namespace serial

Var Tape::record(Matrix value, bool requires_grad,
                 std::function<void(Tape&)> backprop) {
  Node node;
  node.grad = Matrix(value.rows(), value.cols());
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  return record(std::move(value), requires_grad, nullptr);
}

Var Tape::matmul(Var a, Var b) {
  Matrix out = dense_matmul(value(a), value(b));
  Var r = record(std::move(out), needs(a) || needs(b), nullptr);
  nodes_.back().backprop = [a, b, r](Tape& t) {
    const Matrix& g = t.grad_ref(r);
    if (t.needs(a)) accumulate(t.grad_ref(a), dense_matmul_transB(g, t.value(b)));
    if (t.needs(b)) accumulate(t.grad_ref(b), dense_matmul_transA(t.value(a), g));
  };
  return r;
}

Var Tape::add(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  const bool row_bcast = vb.rows() == 1 && va.cols() == vb.cols() && va.rows() != 1;
  if (!row_bcast && !va.same_shape(vb))
    throw std::invalid_argument("add shape mismatch");
  Matrix out = va;
  if (row_bcast) {
    for (int i = 0; i < out.rows(); ++i)
      for (int j = 0; j < out.cols(); ++j) out(i, j) += vb(0, j);
  } else {
    accumulate(out, vb);
  }
  Var r = record(std::move(out), needs(a) || needs(b), nullptr);
  nodes_.back().backprop = [a, b, r, row_bcast](Tape& t) {
    const Matrix& g = t.grad_ref(r);
    if (t.needs(a)) accumulate(t.grad_ref(a), g);
    if (t.needs(b)) {
      if (row_bcast) {
        Matrix& gb = t.grad_ref(b);
        for (int i = 0; i < g.rows(); ++i)
          for (int j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
      } else {
        accumulate(t.grad_ref(b), g);
      }
    }
  };
  return r;
}

Var Tape::sub(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (!va.same_shape(vb)) throw std::invalid_argument("sub shape mismatch");
  Matrix out = va;
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] -= vb.data()[i];
  Var r = record(std::move(out), needs(a) || needs(b), nullptr);
  nodes_.back().backprop = [a, b, r](Tape& t) {
    const Matrix& g = t.grad_ref(r);
    if (t.needs(a)) accumulate(t.grad_ref(a), g);
    if (t.needs(b)) {
      Matrix& gb = t.grad_ref(b);
      for (size_t i = 0; i < g.size(); ++i) gb.data()[i] -= g.data()[i];
    }
  };
  return r;
}

Var Tape::mul(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (!va.same_shape(vb)) throw std::invalid_argument("mul shape mismatch");
  Matrix out = va;
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] *= vb.data()[i];
  Var r = record(std::move(out), needs(a) || needs(b), nullptr);
  nodes_.back().backprop = [a, b, r](Tape& t) {
    const Matrix& g = t.grad_ref(r);
    if (t.needs(a)) {
      Matrix& ga = t.grad_ref(a);
      const Matrix& vb2 = t.value(b);
      for (size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * vb2.data()[i];
    }
    if (t.needs(b)) {
      Matrix& gb = t.grad_ref(b);
      const Matrix& va2 = t.value(a);
      for (size_t i = 0; i < g.size(); ++i) gb.data()[i] += g.data()[i] * va2.data()[i];
    }
  };
  return r;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat of nothing");
  const int rows = value(parts[0]).rows();
  int total = 0;
  bool rg = false;
  for (Var p : parts) {
    if (value(p).rows() != rows) throw std::invalid_argument("concat row mismatch");
    total += value(p).cols();
    rg |= needs(p);
  }
  Matrix out(rows, total);
  int off = 0;
  for (Var p : parts) {
    const Matrix& v = value(p);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < v.cols(); ++j) out(i, off + j) = v(i, j);
    off += v.cols();
  }
  std::vector<Var> ps = parts;
  Var r = record(std::move(out), rg, nullptr);
  nodes_.back().backprop = [ps, r](Tape& t) {
    const Matrix& g = t.grad_ref(r);
    int off2 = 0;
    for (Var p : ps) {
      const int c = t.value(p).cols();
      if (t.needs(p)) {
        Matrix& gp = t.grad_ref(p);
        for (int i = 0; i < g.rows(); ++i)
          for (int j = 0; j < c; ++j) gp(i, j) += g(i, off2 + j);
      }
      off2 += c;
    }
  };
  return r;
}

Var Tape::relu(Var a) {
  Matrix out = value(a);
  for (size_t i = 0; i < out.size(); ++i)
    if (out.data()[i] < 0.0) out.data()[i] = 0.0;
  Var r = record(std::move(out), needs(a), nullptr);
  nodes_.back().backprop = [a, r](Tape& t) {
    if (!t.needs(a)) return;
    const Matrix& g = t.grad_ref(r);
    const Matrix& va = t.value(a);
    Matrix& ga = t.grad_ref(a);
    for (size_t i = 0; i < g.size(); ++i)
      if (va.data()[i] > 0.0) ga.data()[i] += g.data()[i];
  };
  return r;
}

Var Tape::row_l2_normalize(Var a, double floor) {
  const Matrix& va = value(a);
  Matrix out(va.rows(), va.cols());
  std::vector<double> norms(va.rows());
  for (int i = 0; i < va.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < va.cols(); ++j) s += va(i, j) * va(i, j);
    norms[i] = std::max(std::sqrt(s), floor);
    for (int j = 0; j < va.cols(); ++j) out(i, j) = va(i, j) / norms[i];
  }
  Var r = record(std::move(out), needs(a), nullptr);
  nodes_.back().backprop = [a, r, norms, floor](Tape& t) {
    if (!t.needs(a)) return;
    const Matrix& g = t.grad_ref(r);
    const Matrix& va2 = t.value(a);
    Matrix& ga = t.grad_ref(a);
    for (int i = 0; i < va2.rows(); ++i) {
      const double n = norms[i];
      double raw = 0.0;
      for (int j = 0; j < va2.cols(); ++j) raw += va2(i, j) * va2(i, j);
      const bool active = std::sqrt(raw) > floor;
      double dot = 0.0;
      if (active)
        for (int j = 0; j < va2.cols(); ++j) dot += g(i, j) * va2(i, j);
      for (int j = 0; j < va2.cols(); ++j) {
        double v = g(i, j) / n;
        if (active) v -= va2(i, j) * dot / (n * n * n);
        ga(i, j) += v;
      }
    }
  };
  return r;
}

Var Tape::mask_rows(Var a, std::vector<double> mask) {
  const Matrix& va = value(a);
  if (static_cast<int>(mask.size()) != va.rows())
    throw std::invalid_argument("mask length mismatch");
  Matrix out = va;
  for (int i = 0; i < out.rows(); ++i)
    if (mask[i] == 0.0)
      for (int j = 0; j < out.cols(); ++j) out(i, j) = 0.0;
  Var r = record(std::move(out), needs(a), nullptr);
  auto m = std::move(mask);
  nodes_.back().backprop = [a, r, m](Tape& t) {
    if (!t.needs(a)) return;
    const Matrix& g = t.grad_ref(r);
    Matrix& ga = t.grad_ref(a);
    for (int i = 0; i < g.rows(); ++i)
      if (m[i] != 0.0)
        for (int j = 0; j < g.cols(); ++j) ga(i, j) += g(i, j);
  };
  return r;
}

Var Tape::sum_all(Var a) {
  const Matrix& va = value(a);
  double s = 0.0;
  for (size_t i = 0; i < va.size(); ++i) s += va.data()[i];
  Matrix out(1, 1);
  out(0, 0) = s;
  Var r = record(std::move(out), needs(a), nullptr);
  nodes_.back().backprop = [a, r](Tape& t) {
    if (!t.needs(a)) return;
    const double g = t.grad_ref(r)(0, 0);
    Matrix& ga = t.grad_ref(a);
    for (size_t i = 0; i < ga.size(); ++i) ga.data()[i] += g;
  };
  return r;
}

Var Tape::mean_all(Var a) {
  const double inv = 1.0 / static_cast<double>(value(a).size());
  return scale(sum_all(a), inv);
}

Var Tape::add_scalar(Var a, double c) {
  Matrix out = value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] += c;
  Var r = record(std::move(out), needs(a), nullptr);
  nodes_.back().backprop = [a, r](Tape& t) {
    if (t.needs(a)) accumulate(t.grad_ref(a), t.grad_ref(r));
  };
  return r;
}

Var Tape::scale(Var a, double c) {
  Matrix out = value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] *= c;
  Var r = record(std::move(out), needs(a), nullptr);
  nodes_.back().backprop = [a, r, c](Tape& t) {
    if (!t.needs(a)) return;
    const Matrix& g = t.grad_ref(r);
    Matrix& ga = t.grad_ref(a);
    for (size_t i = 0; i < g.size(); ++i) ga.data()[i] += c * g.data()[i];
  };
  return r;
}

Var Tape::log(Var a) {
  Matrix out = value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = std::log(out.data()[i]);
  Var r = record(std::move(out), needs(a), nullptr);
  nodes_.back().backprop = [a, r](Tape& t) {
    if (!t.needs(a)) return;
    const Matrix& g = t.grad_ref(r);
    const Matrix& va = t.value(a);
    Matrix& ga = t.grad_ref(a);
    for (size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] / va.data()[i];
  };
  return r;
}

Var Tape::exp(Var a) {
  Matrix out = value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = std::exp(out.data()[i]);
  Var r = record(std::move(out), needs(a), nullptr);
  nodes_.back().backprop = [a, r](Tape& t) {
    if (!t.needs(a)) return;
    const Matrix& g = t.grad_ref(r);
    const Matrix& vo = t.value(r);
    Matrix& ga = t.grad_ref(a);
    for (size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * vo.data()[i];
  };
  return r;
}

Var Tape::square(Var a) {
  Matrix out = value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] *= out.data()[i];
  Var r = record(std::move(out), needs(a), nullptr);
  nodes_.back().backprop = [a, r](Tape& t) {
    if (!t.needs(a)) return;
    const Matrix& g = t.grad_ref(r);
    const Matrix& va = t.value(a);
    Matrix& ga = t.grad_ref(a);
    for (size_t i = 0; i < g.size(); ++i)
      ga.data()[i] += 2.0 * g.data()[i] * va.data()[i];
  };
  return r;
}

Var Tape::reciprocal(Var a) {
  Matrix out = value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = 1.0 / out.data()[i];
  Var r = record(std::move(out), needs(a), nullptr);
  nodes_.back().backprop = [a, r](Tape& t) {
    if (!t.needs(a)) return;
    const Matrix& g = t.grad_ref(r);
    const Matrix& vo = t.value(r);
    Matrix& ga = t.grad_ref(a);
    for (size_t i = 0; i < g.size(); ++i)
      ga.data()[i] -= g.data()[i] * vo.data()[i] * vo.data()[i];
  };
  return r;
}

Var Tape::pairwise_sq_distances(Var a) {
  const Matrix& va = value(a);
  if (va.cols() != 2) throw std::invalid_argument("expected N x 2 positions");
  const int n = va.rows();
  Matrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double dx = va(i, 0) - va(j, 0);
      const double dy = va(i, 1) - va(j, 1);
      out(i, j) = dx * dx + dy * dy;
    }
  Var r = record(std::move(out), needs(a), nullptr);
  nodes_.back().backprop = [a, r](Tape& t) {
    if (!t.needs(a)) return;
    const Matrix& g = t.grad_ref(r);
    const Matrix& va2 = t.value(a);
    Matrix& ga = t.grad_ref(a);
    const int n2 = va2.rows();
    for (int i = 0; i < n2; ++i)
      for (int j = 0; j < n2; ++j) {
        const double w = 2.0 * (g(i, j) + g(j, i));
        ga(i, 0) += w * (va2(i, 0) - va2(j, 0));
        ga(i, 1) += w * (va2(i, 1) - va2(j, 1));
      }
  };
  return r;
}

Var Tape::sparse_matmul(const SparseMatrix& s, Var x) {
  Matrix out = s.multiply(value(x));
  Var r = record(std::move(out), needs(x), nullptr);
  const SparseMatrix* sp = &s;  // caller keeps the filters alive for the tape
  nodes_.back().backprop = [sp, x, r](Tape& t) {
    if (!t.needs(x)) return;
    accumulate(t.grad_ref(x), sp->multiply_transposed(t.grad_ref(r)));
  };
  return r;
}

Var Tape::gather_rows(Var a, std::vector<int> rows) {
  const Matrix& va = value(a);
  Matrix out(static_cast<int>(rows.size()), va.cols());
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < va.cols(); ++j)
      out(static_cast<int>(i), j) = va(rows[i], j);
  Var r = record(std::move(out), needs(a), nullptr);
  auto idx = std::move(rows);
  nodes_.back().backprop = [a, r, idx](Tape& t) {
    if (!t.needs(a)) return;
    const Matrix& g = t.grad_ref(r);
    Matrix& ga = t.grad_ref(a);
    for (size_t i = 0; i < idx.size(); ++i)
      for (int j = 0; j < g.cols(); ++j)
        ga(idx[i], j) += g(static_cast<int>(i), j);
  };
  return r;
}

Var Tape::tsnet_loss(Var x, const JointP& p, const LossWeights& w) {
  const Matrix& vx = value(x);
  Matrix out(1, 1);
  out(0, 0) = full_loss(vx, p, w);
  Var r = record(std::move(out), needs(x), nullptr);
  const JointP* pp = &p;  // caller keeps p alive for the tape
  nodes_.back().backprop = [x, r, pp, w](Tape& t) {
    if (!t.needs(x)) return;
    const double g = t.grad_ref(r)(0, 0);
    const Matrix gl = loss_gradient(t.value(x), *pp, w);
    Matrix& gx = t.grad_ref(x);
    for (size_t i = 0; i < gx.size(); ++i) gx.data()[i] += g * gl.data()[i];
  };
  return r;
}

void Tape::backward(Var loss) {
  Node& ln = nodes_[loss.id];
  if (ln.value.rows() != 1 || ln.value.cols() != 1)
    throw std::invalid_argument("backward requires a scalar loss");
  ln.grad(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    if (nodes_[i].requires_grad && nodes_[i].backprop) nodes_[i].backprop(*this);
  }
}

void adam_step(Matrix& param, const Matrix& grad, AdamState& state,
               const AdamConfig& cfg) {
  if (!param.same_shape(grad)) throw std::invalid_argument("adam shape mismatch");
  if (state.t == 0) {
    state.m = Matrix(param.rows(), param.cols());
    state.v = Matrix(param.rows(), param.cols());
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < param.size(); ++i) {
    const double g = grad.data()[i];
    double& m = state.m.data()[i];
    double& v = state.v.data()[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    param.data()[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

}  // namespace graphlay::ad
