#pragma once

#include <functional>
#include <vector>

#include "unisort/matrix.hpp"

namespace unisort::ad {

class Tape;

// Handle to a node on a Tape; cheap to copy. A Var is only valid together
// with the Tape that produced it.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  const Matrix& adjoint() const;
  std::size_t rows() const;
  std::size_t cols() const;
};

// Append-only reverse-mode tape. Forward values are computed eagerly; each
// node stores a closure that scatters its adjoint to its parents. Nodes are
// created in topological order by construction, so backward() is a single
// reverse sweep. One tape has one writer; distinct tapes are independent.
class Tape {
 public:
  Var input(Matrix value);
  // Same node kind as input(); the name documents intent at call sites.
  Var constant(Matrix value) { return input(std::move(value)); }

  // Seeds root (must be 1x1) with 1 and accumulates adjoints via the chain
  // rule. All adjoints are reset to zero first, so repeated calls are safe.
  void backward(Var root);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& adjoint(int id) const { return nodes_[static_cast<std::size_t>(id)].adjoint; }
  Matrix& adjoint_mut(int id) { return nodes_[static_cast<std::size_t>(id)].adjoint; }
  std::size_t size() const { return nodes_.size(); }

  using BackwardFn = std::function<void(Tape&, int self)>;
  Var make_node(Matrix value, BackwardFn back);

 private:
  struct Node {
    Matrix value;
    Matrix adjoint;
    BackwardFn back;  // empty for leaves
  };
  std::vector<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape->value(id); }
inline const Matrix& Var::adjoint() const { return tape->adjoint(id); }
inline std::size_t Var::rows() const { return value().rows(); }
inline std::size_t Var::cols() const { return value().cols(); }

// Elementwise and structural primitives. Operands must live on the same tape;
// shape mismatches throw std::invalid_argument.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var matmul(Var a, Var b);
Var abs(Var x);   // subgradient 0 at 0
Var exp(Var x);
Var log(Var x);   // throws std::domain_error on non-positive entries
Var square(Var x);
Var relu(Var x);  // subgradient 0 at 0
Var sum(Var x);   // all entries -> 1x1
Var mean(Var x);
Var max_reduce(Var x);  // max entry -> 1x1; subgradient routed to first max
Var softmax_rows(Var logits, double tau);
Var transpose(Var x);
Var select_row(Var x, std::size_t i);  // 0-based row -> 1xC
Var scale(Var x, double c);
Var divide_scalar(Var x, double c);
Var clamp_min(Var x, double floor);  // zero gradient where clamped
// Expand 1x1 -> r x c, n x 1 -> n x c, or 1 x m -> r x m.
Var broadcast(Var x, std::size_t rows, std::size_t cols);
// Forward value is `hard_value`; the adjoint passes through to `relaxed`
// unchanged, as if the relaxed node had produced the hard output.
Var straight_through(Var relaxed, Matrix hard_value);

// Relaxed sort built from primitives: scores (n x 1) -> row-stochastic n x n.
// Matches relaxed_sort_matrix() in forward value.
Var relaxed_sort(Tape& tape, Var scores, double tau);

// Central finite differences (f(x+h e_i) - f(x-h e_i)) / 2h; the independent
// oracle the gradient tests compare against.
std::vector<double> finite_diff_gradient(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x,
    double h = 1e-5);

}  // namespace unisort::ad
