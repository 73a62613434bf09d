#include "unisort/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace unisort::ad {

namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape)
    throw std::invalid_argument(std::string(op) + ": operands must share a tape");
}

void require_same_shape(Var a, Var b, const char* op) {
  if (!a.value().same_shape(b.value()))
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

Var Tape::input(Matrix value) {
  Node n;
  n.adjoint = Matrix(value.rows(), value.cols());
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::make_node(Matrix value, BackwardFn back) {
  Node n;
  n.adjoint = Matrix(value.rows(), value.cols());
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var root) {
  if (root.tape != this || root.id < 0) throw std::invalid_argument("backward: foreign root");
  if (root.value().size() != 1) throw std::invalid_argument("backward: root must be scalar");
  for (Node& n : nodes_) n.adjoint = Matrix(n.value.rows(), n.value.cols());
  nodes_[static_cast<std::size_t>(root.id)].adjoint[0] = 1.0;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.back) n.back(*this, i);
  }
}

Var add(Var a, Var b) {
  require_same_tape(a, b, "add");
  require_same_shape(a, b, "add");
  Matrix out = a.value() + b.value();
  const int pa = a.id, pb = b.id;
  return a.tape->make_node(std::move(out), [pa, pb](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    t.adjoint_mut(pa) = t.adjoint(pa) + g;
    t.adjoint_mut(pb) = t.adjoint(pb) + g;
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b, "sub");
  require_same_shape(a, b, "sub");
  Matrix out = a.value() - b.value();
  const int pa = a.id, pb = b.id;
  return a.tape->make_node(std::move(out), [pa, pb](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    t.adjoint_mut(pa) = t.adjoint(pa) + g;
    t.adjoint_mut(pb) = t.adjoint(pb) - g;
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b, "mul");
  require_same_shape(a, b, "mul");
  Matrix out = hadamard(a.value(), b.value());
  const int pa = a.id, pb = b.id;
  return a.tape->make_node(std::move(out), [pa, pb](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    t.adjoint_mut(pa) = t.adjoint(pa) + hadamard(g, t.value(pb));
    t.adjoint_mut(pb) = t.adjoint(pb) + hadamard(g, t.value(pa));
  });
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out = unisort::matmul(a.value(), b.value());
  const int pa = a.id, pb = b.id;
  return a.tape->make_node(std::move(out), [pa, pb](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    t.adjoint_mut(pa) = t.adjoint(pa) + unisort::matmul(g, unisort::transpose(t.value(pb)));
    t.adjoint_mut(pb) = t.adjoint(pb) + unisort::matmul(unisort::transpose(t.value(pa)), g);
  });
}

Var abs(Var x) {
  Matrix out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(out[i]);
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& v = t.value(p);
    Matrix& acc = t.adjoint_mut(p);
    for (std::size_t i = 0; i < g.size(); ++i)
      acc[i] += g[i] * (v[i] > 0.0 ? 1.0 : (v[i] < 0.0 ? -1.0 : 0.0));
  });
}

Var exp(Var x) {
  Matrix out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& y = t.value(self);
    Matrix& acc = t.adjoint_mut(p);
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i] * y[i];
  });
}

Var log(Var x) {
  Matrix out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0)) throw std::domain_error("log: non-positive entry");
    out[i] = std::log(out[i]);
  }
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& v = t.value(p);
    Matrix& acc = t.adjoint_mut(p);
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i] / v[i];
  });
}

Var square(Var x) {
  Matrix out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= out[i];
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& v = t.value(p);
    Matrix& acc = t.adjoint_mut(p);
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += 2.0 * g[i] * v[i];
  });
}

Var relu(Var x) {
  Matrix out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& v = t.value(p);
    Matrix& acc = t.adjoint_mut(p);
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += v[i] > 0.0 ? g[i] : 0.0;
  });
}

Var sum(Var x) {
  Matrix out(1, 1, unisort::sum(x.value()));
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p](Tape& t, int self) {
    const double g = t.adjoint(self)[0];
    Matrix& acc = t.adjoint_mut(p);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g;
  });
}

Var mean(Var x) {
  const double inv = 1.0 / static_cast<double>(x.value().size());
  Matrix out(1, 1, unisort::sum(x.value()) * inv);
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p, inv](Tape& t, int self) {
    const double g = t.adjoint(self)[0] * inv;
    Matrix& acc = t.adjoint_mut(p);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g;
  });
}

Var max_reduce(Var x) {
  const Matrix& v = x.value();
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[arg]) arg = i;
  Matrix out(1, 1, v[arg]);
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p, arg](Tape& t, int self) {
    t.adjoint_mut(p)[arg] += t.adjoint(self)[0];
  });
}

Var softmax_rows(Var logits, double tau) {
  Matrix out = unisort::softmax_rows(logits.value(), tau);
  const int p = logits.id;
  return logits.tape->make_node(std::move(out), [p, tau](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& y = t.value(self);
    Matrix& acc = t.adjoint_mut(p);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j)
        acc(i, j) += y(i, j) * (g(i, j) - dot) / tau;
    }
  });
}

Var transpose(Var x) {
  Matrix out = unisort::transpose(x.value());
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p](Tape& t, int self) {
    t.adjoint_mut(p) = t.adjoint(p) + unisort::transpose(t.adjoint(self));
  });
}

Var select_row(Var x, std::size_t i) {
  if (i >= x.rows()) throw std::invalid_argument("select_row: row out of range");
  Matrix out(1, x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) out(0, j) = x.value()(i, j);
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p, i](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    Matrix& acc = t.adjoint_mut(p);
    for (std::size_t j = 0; j < g.cols(); ++j) acc(i, j) += g(0, j);
  });
}

Var scale(Var x, double c) {
  Matrix out = c * x.value();
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p, c](Tape& t, int self) {
    t.adjoint_mut(p) = t.adjoint(p) + c * t.adjoint(self);
  });
}

Var divide_scalar(Var x, double c) {
  if (c == 0.0) throw std::domain_error("divide_scalar: division by zero");
  return scale(x, 1.0 / c);
}

Var clamp_min(Var x, double floor) {
  Matrix out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > floor ? out[i] : floor;
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p, floor](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& v = t.value(p);
    Matrix& acc = t.adjoint_mut(p);
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += v[i] > floor ? g[i] : 0.0;
  });
}

Var broadcast(Var x, std::size_t rows, std::size_t cols) {
  const Matrix& v = x.value();
  const bool from_scalar = v.rows() == 1 && v.cols() == 1;
  const bool from_col = v.cols() == 1 && v.rows() == rows;
  const bool from_row = v.rows() == 1 && v.cols() == cols;
  if (!from_scalar && !from_col && !from_row)
    throw std::invalid_argument("broadcast: incompatible source shape");
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out(i, j) = from_scalar ? v[0] : (from_col ? v(i, 0) : v(0, j));
  const int p = x.id;
  return x.tape->make_node(std::move(out), [p, from_scalar, from_col](Tape& t, int self) {
    const Matrix& g = t.adjoint(self);
    Matrix& acc = t.adjoint_mut(p);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) {
        if (from_scalar)
          acc[0] += g(i, j);
        else if (from_col)
          acc(i, 0) += g(i, j);
        else
          acc(0, j) += g(i, j);
      }
  });
}

Var straight_through(Var relaxed, Matrix hard_value) {
  if (!relaxed.value().same_shape(hard_value))
    throw std::invalid_argument("straight_through: shape mismatch");
  const int p = relaxed.id;
  return relaxed.tape->make_node(std::move(hard_value), [p](Tape& t, int self) {
    t.adjoint_mut(p) = t.adjoint(p) + t.adjoint(self);
  });
}

Var relaxed_sort(Tape& tape, Var scores, double tau) {
  if (scores.cols() != 1) throw std::invalid_argument("relaxed_sort: scores must be a column");
  if (!(tau > 0.0)) throw std::invalid_argument("relaxed_sort: tau must be positive");
  const std::size_t n = scores.rows();
  Var ones = tape.constant(Matrix(n, 1, 1.0));
  Var st = transpose(scores);
  // A[i,j] = |s_i - s_j|, d_j = sum_m A[j,m]
  Var a = abs(sub(matmul(scores, transpose(ones)), matmul(ones, st)));
  Var d = matmul(a, ones);
  std::vector<double> coef(n);
  for (std::size_t i = 0; i < n; ++i)
    coef[i] = static_cast<double>(n) + 1.0 - 2.0 * static_cast<double>(i + 1);
  Var c = tape.constant(Matrix::column(coef));
  Var logits = sub(matmul(c, st), matmul(ones, transpose(d)));
  return softmax_rows(logits, tau);
}

std::vector<double> finite_diff_gradient(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x,
    double h) {
  std::vector<double> grad(x.size());
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace unisort::ad
