#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "unisort/losses.hpp"
#include "unisort/relaxation.hpp"
#include "unisort/rng.hpp"

using namespace unisort;

namespace {

Matrix random_row_stochastic(std::size_t n, Rng& rng) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) = rng.uniform(0.05, 1.0);
      total += m(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) m(i, j) /= total;
  }
  return m;
}

}  // namespace

TEST_CASE("cross entropy examples") {
  const Matrix id2 = Matrix::identity(2);
  CHECK(cross_entropy_rows(id2, id2) == 0.0);

  const Matrix pred = {{0.7311, 0.2689}, {0.2689, 0.7311}};
  CHECK(cross_entropy_rows(id2, pred) == doctest::Approx(-std::log(0.7311)).epsilon(1e-12));
  CHECK(cross_entropy_rows(id2, pred) == doctest::Approx(0.3133).epsilon(1e-3));

  // uniform prediction costs log n
  for (std::size_t n : {2u, 3u, 5u}) {
    const Matrix uniform(n, n, 1.0 / static_cast<double>(n));
    const Matrix target = permutation_to_matrix(Permutation(oracle::descending_order(
        std::vector<double>(n, 0.0))));
    CHECK(cross_entropy_rows(target, uniform) ==
          doctest::Approx(std::log(static_cast<double>(n))).epsilon(1e-12));
  }
}

TEST_CASE("cross entropy is nonnegative and zero only at the target") {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 6));
    const Matrix target = permutation_to_matrix(project_hard(random_row_stochastic(n, rng)));
    const Matrix pred = random_row_stochastic(n, rng);
    CHECK(cross_entropy_rows(target, pred) >= 0.0);
  }
  CHECK(cross_entropy_rows(Matrix::identity(4), Matrix::identity(4)) == 0.0);
}

TEST_CASE("cross entropy survives zero entries via the clamp") {
  const Matrix target = {{1, 0}, {0, 1}};
  const Matrix pred = {{0.0, 1.0}, {0.0, 1.0}};  // zero mass at a true position
  const double loss = cross_entropy_rows(target, pred);
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(-std::log(1e-12) / 2).epsilon(1e-9));
}

TEST_CASE("tape cross entropy matches eager and finite differences") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const int n = rng.uniform_int(2, 5);
    const std::vector<double> s = oracle::grid_scores(n, rng);
    const Matrix target =
        permutation_to_matrix(sort_permutation(ScoreVector(oracle::grid_scores(n, rng))));
    const Matrix pred = relaxed_sort_matrix(s, 1.0);

    ad::Tape tape;
    ad::Var pv = tape.input(pred);
    ad::Var loss = cross_entropy_rows(tape, target, pv);
    CHECK(loss.value()[0] == doctest::Approx(cross_entropy_rows(target, pred)).epsilon(1e-12));

    tape.backward(loss);
    const auto eval = [&](const std::vector<double>& flat) {
      Matrix probe = pred;
      probe.data() = flat;
      return cross_entropy_rows(target, probe);
    };
    const std::vector<double> fd = ad::finite_diff_gradient(eval, pred.data());
    for (std::size_t i = 0; i < fd.size(); ++i)
      CHECK(oracle::guarded_rel_err(pv.adjoint()[i], fd[i], 1e-3) < 1e-5);
  }
}

TEST_CASE("knn loss on hard permutation matrices") {
  // candidate-by-rank layout: transpose of the rank-by-candidate sort matrix
  const Matrix p = transpose(permutation_to_matrix(Permutation({2, 1, 3})));
  // rank 1 is candidate 2
  CHECK(knn_loss(p, 1, {0, 1, 0}, 1) == -1.0);
  CHECK(knn_loss(p, 0, {0, 1, 0}, 1) == 0.0);
  // top 2 are candidates {2, 1}; exactly one of them matches
  CHECK(knn_loss(p, 1, {0, 1, 0}, 2) == -0.5);
  // k = n with a single class
  CHECK(knn_loss(p, 4, {4, 4, 4}, 3) == -1.0);

  CHECK_THROWS_AS(knn_loss(p, 0, {0, 1, 0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(knn_loss(p, 0, {0, 1, 0}, 4), std::invalid_argument);
  CHECK_THROWS_AS(knn_loss(p, 0, {0, 1}, 2), std::invalid_argument);
}

TEST_CASE("knn loss on hard matrices is minus the matching fraction, in [-1, 0]") {
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    const int n = rng.uniform_int(2, 6);
    const std::vector<double> s = oracle::grid_scores(n, rng);
    const Permutation z = sort_permutation(ScoreVector(s));
    const Matrix p = transpose(permutation_to_matrix(z));
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int& l : labels) l = rng.uniform_int(0, 2);
    const int query = rng.uniform_int(0, 2);
    const int k = rng.uniform_int(1, n);

    int matches = 0;
    for (int rank = 1; rank <= k; ++rank)
      if (labels[static_cast<std::size_t>(z.item_at_rank(static_cast<std::size_t>(rank)) - 1)] == query)
        ++matches;
    const double loss = knn_loss(p, query, labels, k);
    CHECK(loss == doctest::Approx(-static_cast<double>(matches) / k).epsilon(1e-12));
    CHECK(loss <= 0.0);
    CHECK(loss >= -1.0);
  }
}

TEST_CASE("knn loss equals the double-loop oracle on relaxed matrices") {
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    const int n = rng.uniform_int(2, 5);
    const Matrix p = random_row_stochastic(static_cast<std::size_t>(n), rng);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int& l : labels) l = rng.uniform_int(0, 1);
    const int query = rng.uniform_int(0, 1);
    const int k = rng.uniform_int(1, n);
    CHECK(knn_loss(p, query, labels, k) ==
          doctest::Approx(oracle::knn_loss_loops(p, query, labels, k)).epsilon(1e-12));
  }
}

TEST_CASE("tape knn loss matches eager and finite differences") {
  Rng rng(19);
  const int n = 4;
  const Matrix p = random_row_stochastic(n, rng);
  const std::vector<int> labels = {1, 0, 1, 0};

  ad::Tape tape;
  ad::Var pv = tape.input(p);
  ad::Var loss = knn_loss(tape, pv, 1, labels, 2);
  CHECK(loss.value()[0] == doctest::Approx(knn_loss(p, 1, labels, 2)).epsilon(1e-12));

  tape.backward(loss);
  const auto eval = [&](const std::vector<double>& flat) {
    Matrix probe = p;
    probe.data() = flat;
    return knn_loss(probe, 1, labels, 2);
  };
  const std::vector<double> fd = ad::finite_diff_gradient(eval, p.data());
  for (std::size_t i = 0; i < fd.size(); ++i)
    CHECK(oracle::guarded_rel_err(pv.adjoint()[i], fd[i], 1e-3) < 1e-5);
}

TEST_CASE("mse") {
  CHECK(mse(3.0, 3.0) == 0.0);
  CHECK(mse(0.0, 2.0) == 4.0);
  CHECK_THROWS_AS(mse(std::nan(""), 0.0), std::invalid_argument);

  Rng rng(23);
  double batch_lib = 0.0, batch_oracle = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double a = rng.uniform(-5, 5), b = rng.uniform(-5, 5);
    batch_lib += mse(a, b);
    batch_oracle += (a - b) * (a - b);
  }
  CHECK(batch_lib / 100 == doctest::Approx(batch_oracle / 100).epsilon(1e-12));

  // tape version against finite differences
  ad::Tape tape;
  ad::Var y = tape.input(Matrix{{1.3}});
  ad::Var loss = mse(tape, 2.0, y);
  CHECK(loss.value()[0] == doctest::Approx(mse(2.0, 1.3)).epsilon(1e-12));
  tape.backward(loss);
  CHECK(y.adjoint()[0] == doctest::Approx(-2.0 * (2.0 - 1.3)).epsilon(1e-12));
}
