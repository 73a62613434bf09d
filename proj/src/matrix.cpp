#include "unisort/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace unisort {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::column(const std::vector<double>& v) {
  Matrix m(v.size(), 1);
  m.data_ = v;
  return m;
}

Matrix Matrix::row(const std::vector<double>& v) {
  Matrix m(1, v.size());
  m.data_ = v;
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("hadamard: shape mismatch");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("operator+: shape mismatch");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("operator-: shape mismatch");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Matrix operator*(double c, const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  return out;
}

double sum(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m[i];
  return s;
}

double max_abs(const Matrix& m) {
  double v = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) v = std::max(v, std::abs(m[i]));
  return v;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) v = std::max(v, std::abs(a[i] - b[i]));
  return v;
}

bool all_finite(const Matrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!std::isfinite(m[i])) return false;
  return true;
}

Matrix softmax_rows(const Matrix& logits, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("softmax_rows: tau must be positive");
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    double mx = logits(i, 0);
    for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      out(i, j) = std::exp((logits(i, j) - mx) / tau);
      z += out(i, j);
    }
    for (std::size_t j = 0; j < logits.cols(); ++j) out(i, j) /= z;
  }
  return out;
}

}  // namespace unisort
