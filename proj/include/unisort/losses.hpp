#pragma once

#include <vector>

#include "unisort/autodiff.hpp"
#include "unisort/matrix.hpp"

namespace unisort {

using LabelVector = std::vector<int>;

// Probabilities are clamped at this floor before the log; relaxed rows can
// underflow to zero at small temperatures.
inline constexpr double kLogClamp = 1e-12;

// Average row-wise cross entropy between a 0/1 target permutation matrix and
// a row-stochastic prediction: -(1/n) * sum_ij 1[P_true=1] * log P_pred.
double cross_entropy_rows(const Matrix& p_true, const Matrix& p_pred);
ad::Var cross_entropy_rows(ad::Tape& tape, const Matrix& p_true, ad::Var p_pred);

// Uniformly weighted kNN loss -(1/k) * sum_{j<=k} sum_i 1[labels_i == query] * P[i,j].
// P[i,j] is the weight of candidate i at rank j; a matrix produced by
// relaxed_sort has rows indexed by rank, so pass its transpose here. On a
// hard permutation matrix this equals minus the fraction of the top k
// candidates sharing the query label.
double knn_loss(const Matrix& p, int query_label, const LabelVector& neighbor_labels, int k);
ad::Var knn_loss(ad::Tape& tape, ad::Var p, int query_label, const LabelVector& neighbor_labels,
                 int k);

// Squared error (y_true - y_pred)^2.
double mse(double y_true, double y_pred);
ad::Var mse(ad::Tape& tape, double y_true, ad::Var y_pred);

}  // namespace unisort
