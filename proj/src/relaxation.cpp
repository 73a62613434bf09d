#include "unisort/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace unisort {

namespace {
constexpr double kSumTol = 1e-9;
}

ScoreVector::ScoreVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("ScoreVector: need at least one entry");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("ScoreVector: entries must be finite");
}

Permutation::Permutation(std::vector<int> one_based) : indices_(std::move(one_based)) {
  const int n = static_cast<int>(indices_.size());
  if (n == 0) throw std::invalid_argument("Permutation: empty");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int v : indices_) {
    if (v < 1 || v > n || seen[static_cast<std::size_t>(v - 1)])
      throw std::invalid_argument("Permutation: entries must be a permutation of 1..n");
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
}

Temperature::Temperature(double tau) : value(tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("Temperature: tau must be positive and finite");
}

Permutation sort_permutation(const ScoreVector& s) {
  std::vector<int> idx(s.size());
  std::iota(idx.begin(), idx.end(), 1);
  // stable_sort keeps appearance order among ties
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return s[static_cast<std::size_t>(a - 1)] > s[static_cast<std::size_t>(b - 1)];
  });
  return Permutation(std::move(idx));
}

Matrix permutation_to_matrix(const Permutation& z) {
  const std::size_t n = z.size();
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) p(i, static_cast<std::size_t>(z.indices()[i] - 1)) = 1.0;
  return p;
}

Matrix pairwise_abs_diff(const ScoreVector& s) {
  const std::size_t n = s.size();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = std::abs(s[i] - s[j]);
  return a;
}

namespace {

Matrix sort_logits_impl(const std::vector<double>& s) {
  const std::size_t n = s.size();
  // d_j = sum_m |s_j - s_m|
  std::vector<double> d(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t m = 0; m < n; ++m) d[j] += std::abs(s[j] - s[m]);
  Matrix logits(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double coef = static_cast<double>(n) + 1.0 - 2.0 * static_cast<double>(i + 1);
    for (std::size_t j = 0; j < n; ++j) logits(i, j) = coef * s[j] - d[j];
  }
  return logits;
}

}  // namespace

Matrix sort_logits(const ScoreVector& s) { return sort_logits_impl(s.values()); }

Matrix relaxed_sort_matrix(const std::vector<double>& scores, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("relaxed_sort: tau must be positive and finite");
  return softmax_rows(sort_logits_impl(scores), tau);
}

UnimodalMatrix relaxed_sort(const ScoreVector& s, Temperature tau) {
  return UnimodalMatrix{relaxed_sort_matrix(s.values(), tau.value), tau.value};
}

std::vector<int> tie_break_argmaxes(const Matrix& m) {
  const std::size_t n = m.rows();
  std::vector<int> result(n, 0);
  std::vector<bool> assigned(m.cols() + 1, false);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m.cols(); ++j) mx = std::max(mx, m(i, j));
    // rule 1: smallest maximizing index not claimed by an earlier row
    int pick = 0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j) == mx && !assigned[j + 1]) {
        pick = static_cast<int>(j + 1);
        break;
      }
    }
    // rule 2: smallest maximizing index
    if (pick == 0) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (m(i, j) == mx) {
          pick = static_cast<int>(j + 1);
          break;
        }
      }
    }
    result[i] = pick;
    assigned[static_cast<std::size_t>(pick)] = true;
  }
  return result;
}

Permutation project_hard(const Matrix& row_stochastic) {
  if (row_stochastic.rows() != row_stochastic.cols())
    throw std::invalid_argument("project_hard: matrix must be square");
  return Permutation(tie_break_argmaxes(row_stochastic));
}

Permutation project_hard(const UnimodalMatrix& u) { return project_hard(u.entries); }

double top_k_sum(const ScoreVector& s, int k) {
  const int n = static_cast<int>(s.size());
  if (k < 1 || k > n) throw std::invalid_argument("top_k_sum: k out of range");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < s.size(); ++c) {
    const double lambda = s[c];
    double v = lambda * k;
    for (std::size_t i = 0; i < s.size(); ++i) v += std::max(s[i] - lambda, 0.0);
    best = std::min(best, v);
  }
  return best;
}

int kth_largest_index(const ScoreVector& s, int k) {
  const int n = static_cast<int>(s.size());
  if (k < 1 || k > n) throw std::invalid_argument("kth_largest_index: k out of range");
  const Matrix logits = sort_logits(s);
  const std::size_t row = static_cast<std::size_t>(k - 1);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < s.size(); ++j) mx = std::max(mx, logits(row, j));
  int arg = 0, hits = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (logits(row, j) == mx) {
      ++hits;
      if (arg == 0) arg = static_cast<int>(j + 1);
    }
  }
  if (hits > 1)
    throw std::domain_error("kth_largest_index: tied maxima (duplicate scores); use project_hard");
  return arg;
}

MatrixClassification classify_matrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument("classify_matrix: matrix must be square and non-empty");
  if (!all_finite(m)) throw std::invalid_argument("classify_matrix: entries must be finite");
  const std::size_t n = m.rows();

  MatrixClassification c;
  bool nonneg = true, binary = true;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] < -kSumTol) nonneg = false;
    if (std::abs(m[i]) > kSumTol && std::abs(m[i] - 1.0) > kSumTol) binary = false;
  }
  bool row_sums = true, col_sums = true;
  for (std::size_t i = 0; i < n; ++i) {
    double rs = 0.0, cs = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      rs += m(i, j);
      cs += m(j, i);
    }
    if (std::abs(rs - 1.0) > kSumTol) row_sums = false;
    if (std::abs(cs - 1.0) > kSumTol) col_sums = false;
  }

  c.row_stochastic = nonneg && row_sums;
  c.doubly_stochastic = c.row_stochastic && col_sums;

  const std::vector<int> argmaxes = tie_break_argmaxes(m);
  std::vector<bool> seen(n + 1, false);
  bool valid_perm = true;
  for (int v : argmaxes) {
    if (seen[static_cast<std::size_t>(v)]) valid_perm = false;
    seen[static_cast<std::size_t>(v)] = true;
  }
  c.unimodal = c.row_stochastic && valid_perm;
  c.permutation = binary && row_sums && col_sums;
  return c;
}

}  // namespace unisort
