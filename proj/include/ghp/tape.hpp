#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "ghp/array.hpp"

namespace ghp {

// Handle into a Tape. Default-constructed handles are invalid.
struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

enum class Op : unsigned char {
  Input,
  Affine,      // y = x · Wᵀ + b, x:{B,n} W:{m,n} b:{m}
  Tanh,
  Swish,       // x · sigmoid(x)
  Softplus,
  Exp,
  Reciprocal,
  Add,
  Sub,
  Mul,
  Scale,       // x * c
  AddConst,    // x + c
  Sum,         // scalar sum of all elements
  Mean,        // scalar mean of all elements
  ConcatCols,  // column-concat; rank-1 inputs broadcast across rows
  SliceCols,   // column range [c0, c1)
  GaussianNll, // ½ Σ[(y−µ)² e^{−lv} + lv + log 2π], y constant
  KlDiagGaussian,  // KL(N(µq, e^{lvq}) ‖ N(µp, e^{lvp})), p constant
};

const char* op_name(Op op);

// Records a computation over Arrays and runs reverse-mode accumulation.
// One tape per loss evaluation; nodes are created forward and walked in
// reverse, which is a valid topological order by construction.
class Tape {
 public:
  Var input(Array value, bool needs_grad);
  Var constant(Array value) { return input(std::move(value), false); }
  Var constant(double v) { return input(Array::scalar(v), false); }

  Var affine(Var x, Var w, Var b);
  Var tanh(Var x);
  Var swish(Var x);
  Var softplus(Var x);
  Var exp(Var x);
  Var reciprocal(Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double c);
  Var add_const(Var x, double c);
  Var neg(Var x) { return scale(x, -1.0); }
  Var square(Var x) { return mul(x, x); }
  Var sum(Var x);
  Var mean(Var x);
  // rows: batch size of the result; rank-1 parts are broadcast to every row
  Var concat_cols(std::span<const Var> parts);
  Var slice_cols(Var x, std::size_t begin, std::size_t end);
  Var gaussian_nll(const Array& target, Var mean, Var log_var);
  Var kl_diag_gaussian(Var mean_q, Var log_var_q, const Array& mean_p, const Array& log_var_p);

  // Accumulates gradients of the scalar `root` into every needs-grad node.
  void backward(Var root);
  void zero_grad();

  const Array& value(Var v) const { return nodes_[check(v)].value; }
  double scalar_value(Var v) const;
  // nullptr when the node never received gradient (unreachable from root)
  const Array* grad(Var v) const;
  Array grad_or_zero(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    Op op = Op::Input;
    Array value;
    Array grad;  // empty until backward touches it
    bool needs_grad = false;
    std::array<int, 3> parents{-1, -1, -1};
    int nparents = 0;
    std::vector<int> more_parents;  // ConcatCols beyond 3
    double c0 = 0.0;                // Scale/AddConst payload
    std::size_t i0 = 0, i1 = 0;     // SliceCols range
    std::shared_ptr<const Array> aux0, aux1;  // fused-loss constants
  };

  int check(Var v) const;
  Var push(Node n);
  bool any_parent_grad(const Node& n) const;
  void ensure_grad(int idx);
  void backward_node(int idx);
  std::vector<int> collect_parents(const Node& n) const;

  std::vector<Node> nodes_;
};

// Numerically stable scalar helpers shared by tape and raw forwards.
double sigmoid(double x);
double softplus(double x);
double softplus_inverse(double y);  // log(e^y − 1)

}  // namespace ghp
