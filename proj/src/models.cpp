#include "unisort/models.hpp"

#include <cmath>
#include <stdexcept>

namespace unisort {

Mlp Mlp::init(int in, int hidden, int out, Rng& rng) {
  if (in < 1 || hidden < 1 || out < 1) throw std::invalid_argument("Mlp: invalid sizes");
  Mlp m;
  const auto glorot = [&rng](std::size_t fan_in, std::size_t fan_out, Matrix& w) {
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-r, r);
  };
  m.w1 = Matrix(static_cast<std::size_t>(in), static_cast<std::size_t>(hidden));
  m.b1 = Matrix(1, static_cast<std::size_t>(hidden));
  m.w2 = Matrix(static_cast<std::size_t>(hidden), static_cast<std::size_t>(out));
  m.b2 = Matrix(1, static_cast<std::size_t>(out));
  glorot(static_cast<std::size_t>(in), static_cast<std::size_t>(hidden), m.w1);
  glorot(static_cast<std::size_t>(hidden), static_cast<std::size_t>(out), m.w2);
  return m;
}

Mlp::TapeVars Mlp::to_tape(ad::Tape& tape) const {
  return TapeVars{tape.input(w1), tape.input(b1), tape.input(w2), tape.input(b2)};
}

ad::Var Mlp::forward(ad::Tape& tape, const TapeVars& vars, ad::Var x) {
  (void)tape;
  const std::size_t batch = x.rows();
  ad::Var h = ad::relu(
      ad::add(ad::matmul(x, vars.w1), ad::broadcast(vars.b1, batch, vars.b1.cols())));
  return ad::add(ad::matmul(h, vars.w2), ad::broadcast(vars.b2, batch, vars.b2.cols()));
}

Matrix Mlp::forward_eager(const Matrix& x) const {
  Matrix h = matmul(x, w1);
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j < h.cols(); ++j) {
      h(i, j) += b1(0, j);
      if (h(i, j) < 0.0) h(i, j) = 0.0;
    }
  Matrix out = matmul(h, w2);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b2(0, j);
  return out;
}

std::vector<double> Mlp::flat_grads(const TapeVars& vars) {
  std::vector<double> out;
  for (const ad::Var& v : {vars.w1, vars.b1, vars.w2, vars.b2}) {
    const Matrix& g = v.adjoint();
    out.insert(out.end(), g.data().begin(), g.data().end());
  }
  return out;
}

void SgdOptimizer::step(const std::vector<Matrix*>& params,
                        const std::vector<const Matrix*>& grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("SgdOptimizer: size mismatch");
  if (velocity.empty()) {
    velocity.reserve(params.size());
    for (const Matrix* p : params) velocity.emplace_back(p->rows(), p->cols());
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& v = velocity[i];
    Matrix& p = *params[i];
    const Matrix& g = *grads[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      v[j] = momentum * v[j] + g[j];
      p[j] -= lr * v[j];
    }
  }
}

}  // namespace unisort
