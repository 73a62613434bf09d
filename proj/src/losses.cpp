#include "unisort/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace unisort {

namespace {

void require_square_match(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != a.cols() || !a.same_shape(b))
    throw std::invalid_argument(std::string(op) + ": matrices must be square and same shape");
}

Matrix knn_mask(std::size_t n, int query_label, const LabelVector& neighbor_labels, int k) {
  if (neighbor_labels.size() != n)
    throw std::invalid_argument("knn_loss: label count must match matrix size");
  if (k < 1 || k > static_cast<int>(n)) throw std::invalid_argument("knn_loss: k out of range");
  Matrix mask(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (neighbor_labels[i] != query_label) continue;
    for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j) mask(i, j) = 1.0;
  }
  return mask;
}

}  // namespace

double cross_entropy_rows(const Matrix& p_true, const Matrix& p_pred) {
  require_square_match(p_true, p_pred, "cross_entropy_rows");
  const std::size_t n = p_true.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (p_true(i, j) > 0.5) total += std::log(std::max(p_pred(i, j), kLogClamp));
  return -total / static_cast<double>(n);
}

ad::Var cross_entropy_rows(ad::Tape& tape, const Matrix& p_true, ad::Var p_pred) {
  require_square_match(p_true, p_pred.value(), "cross_entropy_rows");
  ad::Var mask = tape.constant(p_true);
  ad::Var logs = ad::log(ad::clamp_min(p_pred, kLogClamp));
  ad::Var total = ad::sum(ad::mul(mask, logs));
  return ad::scale(total, -1.0 / static_cast<double>(p_true.rows()));
}

double knn_loss(const Matrix& p, int query_label, const LabelVector& neighbor_labels, int k) {
  if (p.rows() != p.cols()) throw std::invalid_argument("knn_loss: matrix must be square");
  const Matrix mask = knn_mask(p.rows(), query_label, neighbor_labels, k);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += mask[i] * p[i];
  return -total / static_cast<double>(k);
}

ad::Var knn_loss(ad::Tape& tape, ad::Var p, int query_label, const LabelVector& neighbor_labels,
                 int k) {
  if (p.rows() != p.cols()) throw std::invalid_argument("knn_loss: matrix must be square");
  ad::Var mask = tape.constant(knn_mask(p.rows(), query_label, neighbor_labels, k));
  return ad::scale(ad::sum(ad::mul(mask, p)), -1.0 / static_cast<double>(k));
}

double mse(double y_true, double y_pred) {
  if (!std::isfinite(y_true) || !std::isfinite(y_pred))
    throw std::invalid_argument("mse: arguments must be finite");
  const double d = y_true - y_pred;
  return d * d;
}

ad::Var mse(ad::Tape& tape, double y_true, ad::Var y_pred) {
  if (y_pred.value().size() != 1) throw std::invalid_argument("mse: prediction must be scalar");
  ad::Var target = tape.constant(Matrix(1, 1, y_true));
  return ad::square(ad::sub(target, y_pred));
}

}  // namespace unisort
