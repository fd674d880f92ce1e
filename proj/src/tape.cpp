#include "ghp/tape.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace ghp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw std::invalid_argument(std::string("tape op '") + op + "': " + detail);
}
}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::Input: return "input";
    case Op::Affine: return "affine";
    case Op::Tanh: return "tanh";
    case Op::Swish: return "swish";
    case Op::Softplus: return "softplus";
    case Op::Exp: return "exp";
    case Op::Reciprocal: return "reciprocal";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::AddConst: return "add_const";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::ConcatCols: return "concat_cols";
    case Op::SliceCols: return "slice_cols";
    case Op::GaussianNll: return "gaussian_nll";
    case Op::KlDiagGaussian: return "kl_diag_gaussian";
  }
  return "?";
}

double sigmoid(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double softplus_inverse(double y) {
  if (y > 30.0) return y;
  return std::log(std::expm1(y));
}

int Tape::check(Var v) const {
  if (!v.valid() || static_cast<std::size_t>(v.idx) >= nodes_.size())
    throw std::invalid_argument("tape: invalid Var handle");
  return v.idx;
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

bool Tape::any_parent_grad(const Node& n) const {
  for (int i = 0; i < n.nparents; ++i)
    if (nodes_[n.parents[i]].needs_grad) return true;
  for (int p : n.more_parents)
    if (nodes_[p].needs_grad) return true;
  return false;
}

Var Tape::input(Array value, bool needs_grad) {
  Node n;
  n.op = Op::Input;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  return push(n);
}

Var Tape::affine(Var xv, Var wv, Var bv) {
  const Array& x = value(xv);
  const Array& w = value(wv);
  const Array& b = value(bv);
  if (w.rank() != 2) shape_error("affine", "weight must be rank-2, got " + w.shape_str());
  std::size_t m = w.shape[0], nin = w.shape[1];
  if (x.cols() != nin)
    shape_error("affine", "input " + x.shape_str() + " incompatible with weight " + w.shape_str());
  if (b.size() != m)
    shape_error("affine", "bias " + b.shape_str() + " incompatible with weight " + w.shape_str());
  std::size_t rows = x.rows();

  Node n;
  n.op = Op::Affine;
  n.parents = {xv.idx, wv.idx, bv.idx};
  n.nparents = 3;
  n.needs_grad = any_parent_grad(n);
  Array y = x.rank() == 2 ? Array::zeros({rows, m}) : Array::zeros({m});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data.data() + r * nin;
    double* yr = y.data.data() + r * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double* wj = w.data.data() + j * nin;
      double acc = b.data[j];
      for (std::size_t k = 0; k < nin; ++k) acc += wj[k] * xr[k];
      yr[j] = acc;
    }
  }
  n.value = std::move(y);
  return push(n);
}

namespace {
template <typename F>
Array map_unary(const Array& x, F f) {
  Array y = x;
  for (double& v : y.data) v = f(v);
  return y;
}
}  // namespace

Var Tape::tanh(Var xv) {
  Node n;
  n.op = Op::Tanh;
  n.parents[0] = check(xv);
  n.nparents = 1;
  n.needs_grad = any_parent_grad(n);
  n.value = map_unary(value(xv), [](double v) { return std::tanh(v); });
  return push(n);
}

Var Tape::swish(Var xv) {
  Node n;
  n.op = Op::Swish;
  n.parents[0] = check(xv);
  n.nparents = 1;
  n.needs_grad = any_parent_grad(n);
  n.value = map_unary(value(xv), [](double v) { return v * sigmoid(v); });
  return push(n);
}

Var Tape::softplus(Var xv) {
  Node n;
  n.op = Op::Softplus;
  n.parents[0] = check(xv);
  n.nparents = 1;
  n.needs_grad = any_parent_grad(n);
  n.value = map_unary(value(xv), [](double v) { return ghp::softplus(v); });
  return push(n);
}

Var Tape::exp(Var xv) {
  Node n;
  n.op = Op::Exp;
  n.parents[0] = check(xv);
  n.nparents = 1;
  n.needs_grad = any_parent_grad(n);
  n.value = map_unary(value(xv), [](double v) { return std::exp(v); });
  return push(n);
}

Var Tape::reciprocal(Var xv) {
  Node n;
  n.op = Op::Reciprocal;
  n.parents[0] = check(xv);
  n.nparents = 1;
  n.needs_grad = any_parent_grad(n);
  n.value = map_unary(value(xv), [](double v) { return 1.0 / v; });
  return push(n);
}

namespace {
void require_same_shape(const char* op, const Array& a, const Array& b) {
  if (!a.same_shape(b))
    shape_error(op, "operands differ: " + a.shape_str() + " vs " + b.shape_str());
}
}  // namespace

Var Tape::add(Var av, Var bv) {
  const Array& a = value(av);
  const Array& b = value(bv);
  require_same_shape("add", a, b);
  Node n;
  n.op = Op::Add;
  n.parents = {av.idx, bv.idx, -1};
  n.nparents = 2;
  n.needs_grad = any_parent_grad(n);
  Array y = a;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += b.data[i];
  n.value = std::move(y);
  return push(n);
}

Var Tape::sub(Var av, Var bv) {
  const Array& a = value(av);
  const Array& b = value(bv);
  require_same_shape("sub", a, b);
  Node n;
  n.op = Op::Sub;
  n.parents = {av.idx, bv.idx, -1};
  n.nparents = 2;
  n.needs_grad = any_parent_grad(n);
  Array y = a;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] -= b.data[i];
  n.value = std::move(y);
  return push(n);
}

Var Tape::mul(Var av, Var bv) {
  const Array& a = value(av);
  const Array& b = value(bv);
  require_same_shape("mul", a, b);
  Node n;
  n.op = Op::Mul;
  n.parents = {av.idx, bv.idx, -1};
  n.nparents = 2;
  n.needs_grad = any_parent_grad(n);
  Array y = a;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= b.data[i];
  n.value = std::move(y);
  return push(n);
}

Var Tape::scale(Var xv, double c) {
  Node n;
  n.op = Op::Scale;
  n.parents[0] = check(xv);
  n.nparents = 1;
  n.c0 = c;
  n.needs_grad = any_parent_grad(n);
  n.value = map_unary(value(xv), [c](double v) { return c * v; });
  return push(n);
}

Var Tape::add_const(Var xv, double c) {
  Node n;
  n.op = Op::AddConst;
  n.parents[0] = check(xv);
  n.nparents = 1;
  n.c0 = c;
  n.needs_grad = any_parent_grad(n);
  n.value = map_unary(value(xv), [c](double v) { return v + c; });
  return push(n);
}

Var Tape::sum(Var xv) {
  Node n;
  n.op = Op::Sum;
  n.parents[0] = check(xv);
  n.nparents = 1;
  n.needs_grad = any_parent_grad(n);
  double acc = 0.0;
  for (double v : value(xv).data) acc += v;
  n.value = Array::scalar(acc);
  return push(n);
}

Var Tape::mean(Var xv) {
  Node n;
  n.op = Op::Mean;
  n.parents[0] = check(xv);
  n.nparents = 1;
  n.needs_grad = any_parent_grad(n);
  const Array& x = value(xv);
  double acc = 0.0;
  for (double v : x.data) acc += v;
  n.value = Array::scalar(acc / static_cast<double>(x.size()));
  return push(n);
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) shape_error("concat_cols", "no inputs");
  std::size_t rows = 1;
  for (Var p : parts) {
    const Array& a = value(p);
    if (a.rank() == 2) {
      if (rows != 1 && a.rows() != rows)
        shape_error("concat_cols", "row mismatch: " + std::to_string(rows) + " vs " + a.shape_str());
      rows = a.rows();
    }
  }
  std::size_t total = 0;
  for (Var p : parts) total += value(p).cols();

  Node n;
  n.op = Op::ConcatCols;
  for (std::size_t i = 0; i < parts.size() && i < 3; ++i) n.parents[i] = check(parts[i]);
  n.nparents = static_cast<int>(std::min<std::size_t>(parts.size(), 3));
  for (std::size_t i = 3; i < parts.size(); ++i) n.more_parents.push_back(check(parts[i]));
  n.needs_grad = any_parent_grad(n);

  Array y = rows == 1 && value(parts[0]).rank() == 1 ? Array::zeros({total}) : Array::zeros({rows, total});
  std::size_t col0 = 0;
  for (Var p : parts) {
    const Array& a = value(p);
    std::size_t c = a.cols();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* src = a.rank() == 2 ? a.data.data() + r * c : a.data.data();
      double* dst = y.data.data() + r * total + col0;
      for (std::size_t k = 0; k < c; ++k) dst[k] = src[k];
    }
    col0 += c;
  }
  n.value = std::move(y);
  return push(n);
}

Var Tape::slice_cols(Var xv, std::size_t begin, std::size_t end) {
  const Array& x = value(xv);
  if (begin >= end || end > x.cols())
    shape_error("slice_cols", "range [" + std::to_string(begin) + "," + std::to_string(end) +
                                  ") out of " + x.shape_str());
  std::size_t rows = x.rows(), w = end - begin;
  Node n;
  n.op = Op::SliceCols;
  n.parents[0] = xv.idx;
  n.nparents = 1;
  n.i0 = begin;
  n.i1 = end;
  n.needs_grad = any_parent_grad(n);
  Array y = x.rank() == 2 ? Array::zeros({rows, w}) : Array::zeros({w});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < w; ++k) y.data[r * w + k] = x.data[r * x.cols() + begin + k];
  n.value = std::move(y);
  return push(n);
}

Var Tape::gaussian_nll(const Array& target, Var meanv, Var logvarv) {
  const Array& mu = value(meanv);
  const Array& lv = value(logvarv);
  if (!target.same_shape(mu) || !target.same_shape(lv))
    shape_error("gaussian_nll", "target " + target.shape_str() + ", mean " + mu.shape_str() +
                                    ", log_var " + lv.shape_str() + " must match");
  Node n;
  n.op = Op::GaussianNll;
  n.parents = {meanv.idx, logvarv.idx, -1};
  n.nparents = 2;
  n.needs_grad = any_parent_grad(n);
  n.aux0 = std::make_shared<Array>(target);
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double d = target.data[i] - mu.data[i];
    acc += d * d * std::exp(-lv.data[i]) + lv.data[i] + kLog2Pi;
  }
  n.value = Array::scalar(0.5 * acc);
  return push(n);
}

Var Tape::kl_diag_gaussian(Var mean_qv, Var log_var_qv, const Array& mean_p, const Array& log_var_p) {
  const Array& mq = value(mean_qv);
  const Array& lq = value(log_var_qv);
  if (!mq.same_shape(lq) || !mq.same_shape(mean_p) || !mq.same_shape(log_var_p))
    shape_error("kl_diag_gaussian", "all four arguments must share shape, got mean_q " +
                                        mq.shape_str() + ", log_var_q " + lq.shape_str() +
                                        ", mean_p " + mean_p.shape_str() + ", log_var_p " +
                                        log_var_p.shape_str());
  Node n;
  n.op = Op::KlDiagGaussian;
  n.parents = {mean_qv.idx, log_var_qv.idx, -1};
  n.nparents = 2;
  n.needs_grad = any_parent_grad(n);
  n.aux0 = std::make_shared<Array>(mean_p);
  n.aux1 = std::make_shared<Array>(log_var_p);
  double acc = 0.0;
  for (std::size_t i = 0; i < mq.size(); ++i) {
    double dm = mq.data[i] - mean_p.data[i];
    acc += std::exp(lq.data[i] - log_var_p.data[i]) + dm * dm * std::exp(-log_var_p.data[i]) - 1.0 +
           log_var_p.data[i] - lq.data[i];
  }
  n.value = Array::scalar(0.5 * acc);
  return push(n);
}

double Tape::scalar_value(Var v) const {
  const Array& a = value(v);
  if (a.size() != 1) throw std::invalid_argument("tape: expected scalar, got " + a.shape_str());
  return a.data[0];
}

const Array* Tape::grad(Var v) const {
  const Node& n = nodes_[check(v)];
  return n.grad.size() ? &n.grad : nullptr;
}

Array Tape::grad_or_zero(Var v) const {
  const Node& n = nodes_[check(v)];
  if (n.grad.size()) return n.grad;
  return Array::zeros(n.value.shape);
}

void Tape::zero_grad() {
  for (Node& n : nodes_) n.grad = Array();
}

void Tape::clear() { nodes_.clear(); }

void Tape::ensure_grad(int idx) {
  Node& n = nodes_[idx];
  if (!n.grad.size()) n.grad = Array::zeros(n.value.shape);
}

void Tape::backward(Var root) {
  int r = check(root);
  if (nodes_[r].value.size() != 1)
    throw std::invalid_argument("tape backward: root must be scalar, got " +
                                nodes_[r].value.shape_str());
  ensure_grad(r);
  nodes_[r].grad.data[0] += 1.0;
  for (int i = r; i >= 0; --i) {
    // only nodes that received gradient and have needs-grad ancestry propagate
    if (!nodes_[i].grad.size() || !nodes_[i].needs_grad) continue;
    backward_node(i);
  }
}

void Tape::backward_node(int idx) {
  Node& n = nodes_[idx];
  const Array& g = n.grad;
  auto want = [&](int p) { return p >= 0 && nodes_[p].needs_grad; };
  auto acc = [&](int p) -> Array& {
    ensure_grad(p);
    return nodes_[p].grad;
  };

  switch (n.op) {
    case Op::Input:
      break;
    case Op::Affine: {
      int xp = n.parents[0], wp = n.parents[1], bp = n.parents[2];
      const Array& x = nodes_[xp].value;
      const Array& w = nodes_[wp].value;
      std::size_t rows = x.rows(), nin = w.shape[1], m = w.shape[0];
      if (want(xp)) {
        Array& gx = acc(xp);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gr = g.data.data() + r * m;
          double* gxr = gx.data.data() + r * nin;
          for (std::size_t j = 0; j < m; ++j) {
            double gj = gr[j];
            if (gj == 0.0) continue;
            const double* wj = w.data.data() + j * nin;
            for (std::size_t k = 0; k < nin; ++k) gxr[k] += gj * wj[k];
          }
        }
      }
      if (want(wp)) {
        Array& gw = acc(wp);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gr = g.data.data() + r * m;
          const double* xr = x.data.data() + r * nin;
          for (std::size_t j = 0; j < m; ++j) {
            double gj = gr[j];
            if (gj == 0.0) continue;
            double* gwj = gw.data.data() + j * nin;
            for (std::size_t k = 0; k < nin; ++k) gwj[k] += gj * xr[k];
          }
        }
      }
      if (want(bp)) {
        Array& gb = acc(bp);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < m; ++j) gb.data[j] += g.data[r * m + j];
      }
      break;
    }
    case Op::Tanh: {
      int p = n.parents[0];
      if (!want(p)) break;
      Array& gp = acc(p);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double t = n.value.data[i];
        gp.data[i] += g.data[i] * (1.0 - t * t);
      }
      break;
    }
    case Op::Swish: {
      int p = n.parents[0];
      if (!want(p)) break;
      Array& gp = acc(p);
      const Array& x = nodes_[p].value;
      for (std::size_t i = 0; i < g.size(); ++i) {
        double s = sigmoid(x.data[i]);
        gp.data[i] += g.data[i] * (s + x.data[i] * s * (1.0 - s));
      }
      break;
    }
    case Op::Softplus: {
      int p = n.parents[0];
      if (!want(p)) break;
      Array& gp = acc(p);
      const Array& x = nodes_[p].value;
      for (std::size_t i = 0; i < g.size(); ++i) gp.data[i] += g.data[i] * sigmoid(x.data[i]);
      break;
    }
    case Op::Exp: {
      int p = n.parents[0];
      if (!want(p)) break;
      Array& gp = acc(p);
      for (std::size_t i = 0; i < g.size(); ++i) gp.data[i] += g.data[i] * n.value.data[i];
      break;
    }
    case Op::Reciprocal: {
      int p = n.parents[0];
      if (!want(p)) break;
      Array& gp = acc(p);
      for (std::size_t i = 0; i < g.size(); ++i)
        gp.data[i] -= g.data[i] * n.value.data[i] * n.value.data[i];
      break;
    }
    case Op::Add: {
      for (int k = 0; k < 2; ++k) {
        int p = n.parents[k];
        if (!want(p)) continue;
        Array& gp = acc(p);
        for (std::size_t i = 0; i < g.size(); ++i) gp.data[i] += g.data[i];
      }
      break;
    }
    case Op::Sub: {
      if (want(n.parents[0])) {
        Array& gp = acc(n.parents[0]);
        for (std::size_t i = 0; i < g.size(); ++i) gp.data[i] += g.data[i];
      }
      if (want(n.parents[1])) {
        Array& gp = acc(n.parents[1]);
        for (std::size_t i = 0; i < g.size(); ++i) gp.data[i] -= g.data[i];
      }
      break;
    }
    case Op::Mul: {
      int ap = n.parents[0], bp = n.parents[1];
      if (want(ap)) {
        Array& gp = acc(ap);
        const Array& b = nodes_[bp].value;
        for (std::size_t i = 0; i < g.size(); ++i) gp.data[i] += g.data[i] * b.data[i];
      }
      if (want(bp)) {
        Array& gp = acc(bp);
        const Array& a = nodes_[ap].value;
        for (std::size_t i = 0; i < g.size(); ++i) gp.data[i] += g.data[i] * a.data[i];
      }
      break;
    }
    case Op::Scale: {
      int p = n.parents[0];
      if (!want(p)) break;
      Array& gp = acc(p);
      for (std::size_t i = 0; i < g.size(); ++i) gp.data[i] += g.data[i] * n.c0;
      break;
    }
    case Op::AddConst: {
      int p = n.parents[0];
      if (!want(p)) break;
      Array& gp = acc(p);
      for (std::size_t i = 0; i < g.size(); ++i) gp.data[i] += g.data[i];
      break;
    }
    case Op::Sum: {
      int p = n.parents[0];
      if (!want(p)) break;
      Array& gp = acc(p);
      double gs = g.data[0];
      for (double& v : gp.data) v += gs;
      break;
    }
    case Op::Mean: {
      int p = n.parents[0];
      if (!want(p)) break;
      Array& gp = acc(p);
      double gs = g.data[0] / static_cast<double>(gp.size());
      for (double& v : gp.data) v += gs;
      break;
    }
    case Op::ConcatCols: {
      std::vector<int> ps = collect_parents(n);
      std::size_t total = n.value.cols(), rows = n.value.rows();
      std::size_t col0 = 0;
      for (int p : ps) {
        const Array& a = nodes_[p].value;
        std::size_t c = a.cols();
        if (want(p)) {
          Array& gp = acc(p);
          for (std::size_t r = 0; r < rows; ++r) {
            const double* src = g.data.data() + r * total + col0;
            double* dst = a.rank() == 2 ? gp.data.data() + r * c : gp.data.data();
            for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
          }
        }
        col0 += c;
      }
      break;
    }
    case Op::SliceCols: {
      int p = n.parents[0];
      if (!want(p)) break;
      Array& gp = acc(p);
      const Array& x = nodes_[p].value;
      std::size_t rows = x.rows(), w = n.i1 - n.i0;
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < w; ++k)
          gp.data[r * x.cols() + n.i0 + k] += g.data[r * w + k];
      break;
    }
    case Op::GaussianNll: {
      int mp = n.parents[0], lp = n.parents[1];
      const Array& mu = nodes_[mp].value;
      const Array& lv = nodes_[lp].value;
      const Array& y = *n.aux0;
      double gs = g.data[0];
      if (want(mp)) {
        Array& gp = acc(mp);
        for (std::size_t i = 0; i < mu.size(); ++i)
          gp.data[i] += gs * (mu.data[i] - y.data[i]) * std::exp(-lv.data[i]);
      }
      if (want(lp)) {
        Array& gp = acc(lp);
        for (std::size_t i = 0; i < mu.size(); ++i) {
          double d = y.data[i] - mu.data[i];
          gp.data[i] += gs * 0.5 * (1.0 - d * d * std::exp(-lv.data[i]));
        }
      }
      break;
    }
    case Op::KlDiagGaussian: {
      int mp = n.parents[0], lp = n.parents[1];
      const Array& mq = nodes_[mp].value;
      const Array& lq = nodes_[lp].value;
      const Array& pm = *n.aux0;
      const Array& pl = *n.aux1;
      double gs = g.data[0];
      if (want(mp)) {
        Array& gp = acc(mp);
        for (std::size_t i = 0; i < mq.size(); ++i)
          gp.data[i] += gs * (mq.data[i] - pm.data[i]) * std::exp(-pl.data[i]);
      }
      if (want(lp)) {
        Array& gp = acc(lp);
        for (std::size_t i = 0; i < mq.size(); ++i)
          gp.data[i] += gs * 0.5 * (std::exp(lq.data[i] - pl.data[i]) - 1.0);
      }
      break;
    }
  }
}

std::vector<int> Tape::collect_parents(const Node& n) const {
  std::vector<int> ps;
  ps.reserve(n.nparents + n.more_parents.size());
  for (int i = 0; i < n.nparents; ++i) ps.push_back(n.parents[i]);
  for (int p : n.more_parents) ps.push_back(p);
  return ps;
}

}  // namespace ghp
