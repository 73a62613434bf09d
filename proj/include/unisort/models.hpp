#pragma once

#include <vector>

#include "unisort/autodiff.hpp"
#include "unisort/matrix.hpp"
#include "unisort/rng.hpp"

namespace unisort {

// Two-layer perceptron with relu hidden activation, shared across sequence
// positions: rows of the input batch are processed independently.
struct Mlp {
  Matrix w1, b1, w2, b2;  // in x h, 1 x h, h x out, 1 x out

  static Mlp init(int in, int hidden, int out, Rng& rng);

  struct TapeVars {
    ad::Var w1, b1, w2, b2;
  };
  TapeVars to_tape(ad::Tape& tape) const;

  // x: batch x in -> batch x out
  static ad::Var forward(ad::Tape& tape, const TapeVars& vars, ad::Var x);
  Matrix forward_eager(const Matrix& x) const;

  std::vector<Matrix*> params() { return {&w1, &b1, &w2, &b2}; }
  std::size_t param_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  // Adjoints of the tape vars, flattened in parameter order.
  static std::vector<double> flat_grads(const TapeVars& vars);
};

// Constant-step SGD with optional momentum. Velocity buffers are sized on
// first use and owned here.
struct SgdOptimizer {
  double lr = 0.1;
  double momentum = 0.0;
  std::vector<Matrix> velocity;

  void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads);
};

}  // namespace unisort
