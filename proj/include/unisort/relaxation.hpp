#pragma once

#include <vector>

#include "unisort/matrix.hpp"

namespace unisort {

// Real score vector; the input to sorting and the parameter of the
// Plackett-Luce family. Entries must be finite, n >= 1.
class ScoreVector {
 public:
  explicit ScoreVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

// Ordering of n items. Public indices are 1-based: indices()[r-1] is the item
// occupying rank r. Construction validates that entries are exactly {1..n}.
class Permutation {
 public:
  explicit Permutation(std::vector<int> one_based);

  std::size_t size() const { return indices_.size(); }
  // rank is 1-based; returns the 1-based item index at that rank.
  int item_at_rank(std::size_t rank) const { return indices_[rank - 1]; }
  const std::vector<int>& indices() const { return indices_; }
  bool operator==(const Permutation& o) const = default;

 private:
  std::vector<int> indices_;
};

// Softmax temperature; must be strictly positive.
struct Temperature {
  explicit Temperature(double tau);
  double value;
};

// Output of the relaxed sort: row-stochastic with distinct row argmaxes.
struct UnimodalMatrix {
  Matrix entries;
  double temperature = 1.0;
};

struct MatrixClassification {
  bool row_stochastic = false;
  bool doubly_stochastic = false;
  bool unimodal = false;
  bool permutation = false;
};

// Descending-order sort; ties take the index appearing first.
Permutation sort_permutation(const ScoreVector& s);

// P[i, z_i] = 1, all else 0 (1-based z).
Matrix permutation_to_matrix(const Permutation& z);

// A[i,j] = |s_i - s_j|.
Matrix pairwise_abs_diff(const ScoreVector& s);

// Row i = (n+1-2i) * s - A_s * 1. Row-wise argmax recovers the descending
// order when scores are distinct.
Matrix sort_logits(const ScoreVector& s);

// Row-wise softmax of sort_logits(s) / tau.
UnimodalMatrix relaxed_sort(const ScoreVector& s, Temperature tau);

// Working-form variant used by samplers and fuzzers; same computation.
Matrix relaxed_sort_matrix(const std::vector<double>& scores, double tau);

// Row-wise argmax with the two-rule tie protocol: prefer the smallest
// maximizing index not yet assigned to an earlier row, else the smallest
// maximizing index. Throws if the result is not a valid permutation (cannot
// happen for relaxed_sort outputs).
Permutation project_hard(const UnimodalMatrix& u);
Permutation project_hard(const Matrix& row_stochastic);

// Tie-protocol argmaxes without the validity requirement; used by
// classify_matrix.
std::vector<int> tie_break_argmaxes(const Matrix& m);

// Sum of the k largest entries, evaluated as
// min over lambda in {s_i} of lambda*k + sum_i max(s_i - lambda, 0).
double top_k_sum(const ScoreVector& s, int k);

// Index (1-based) of the k-th largest entry via the argmax of row k of
// sort_logits. Requires distinct scores; a tied row maximum throws.
int kth_largest_index(const ScoreVector& s, int k);

// Flags computed with absolute tolerance 1e-9 on row/column sums.
MatrixClassification classify_matrix(const Matrix& m);

}  // namespace unisort
