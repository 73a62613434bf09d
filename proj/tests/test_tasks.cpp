#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "unisort/data.hpp"
#include "unisort/models.hpp"
#include "unisort/relaxation.hpp"
#include "unisort/rng.hpp"
#include "unisort/tasks.hpp"
#include "unisort/validate.hpp"

using namespace unisort;

namespace {

TrainConfig small_sort_config() {
  TrainConfig cfg;
  cfg.n = 4;
  cfg.d = 3;
  cfg.noise = 0.02;
  cfg.tau = 2.0;
  cfg.epochs = 4;
  cfg.lr = 0.5;
  cfg.count = 64;
  cfg.hidden = 8;
  cfg.seed = 91;
  return cfg;
}

}  // namespace

TEST_CASE("generate_sequences determinism and validity") {
  const SyntheticSequenceDataset a = generate_sequences(5, 4, 32, 0.05, 7);
  const SyntheticSequenceDataset b = generate_sequences(5, 4, 32, 0.05, 7);
  CHECK(a.train.size() == 32);
  CHECK(a.valid.size() == 8);
  CHECK(a.test.size() == 16);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].features == b.train[i].features);
    CHECK(a.train[i].values == b.train[i].values);
  }

  // distinct values, so the ground-truth permutation is unique, and the
  // descending sort of the values matches the library sort
  for (const Sequence& seq : a.train) {
    std::vector<double> sorted = seq.values;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    const Permutation z = sort_permutation(ScoreVector(seq.values));
    for (std::size_t r = 1; r <= z.size(); ++r)
      CHECK(seq.values[static_cast<std::size_t>(z.item_at_rank(r) - 1)] == sorted[r - 1]);
  }

  CHECK_THROWS_AS(generate_sequences(1, 1, 4, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_sequences(4, 0, 4, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_sequences(4, 1, 4, -0.5, 1), std::invalid_argument);
}

TEST_CASE("noise-free d=1 features equal the underlying values") {
  const SyntheticSequenceDataset ds = generate_sequences(5, 1, 8, 0.0, 3);
  for (const Sequence& seq : ds.train)
    for (std::size_t i = 0; i < seq.values.size(); ++i)
      CHECK(seq.features(i, 0) == seq.values[i]);
}

TEST_CASE("untrained model scores near chance rank accuracy") {
  const SyntheticSequenceDataset ds = generate_sequences(5, 4, 64, 0.05, 11);
  Rng rng(1234);
  const Mlp model = Mlp::init(4, 8, 1, rng);
  double element = 0.0;
  for (const Sequence& seq : ds.test) {
    const Permutation pred =
        project_hard(relaxed_sort_matrix(model.forward_eager(seq.features).data(), 1.0));
    const Permutation truth = sort_permutation(ScoreVector(seq.values));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (pred.indices()[i] == truth.indices()[i]) ++hits;
    element += static_cast<double>(hits) / 5.0;
  }
  element /= static_cast<double>(ds.test.size());
  CHECK(element == doctest::Approx(0.2).epsilon(0.6));  // 1/n plus generous noise allowance
}

TEST_CASE("train_sort improves the loss in deterministic and stochastic modes") {
  for (TrainMode mode : {TrainMode::kDeterministic, TrainMode::kStochastic}) {
    TrainConfig cfg = small_sort_config();
    cfg.mode = mode;
    cfg.n_samples = 3;
    const SyntheticSequenceDataset ds =
        generate_sequences(cfg.n, cfg.d, cfg.count, cfg.noise, cfg.seed);
    const TrainResult result = train_sort(ds, cfg);
    REQUIRE(result.curve.size() == static_cast<std::size_t>(cfg.epochs));
    CHECK(result.curve.back().train_loss < result.curve.front().train_loss);
    CHECK(result.metrics.exact_perm_accuracy <= result.metrics.element_rank_accuracy);
    CHECK(result.metrics.element_rank_accuracy > 0.0);
  }
}

TEST_CASE("train_sort straight-through mode runs and stays finite") {
  TrainConfig cfg = small_sort_config();
  cfg.mode = TrainMode::kStraightThrough;
  cfg.n_samples = 2;
  cfg.epochs = 2;
  const SyntheticSequenceDataset ds =
      generate_sequences(cfg.n, cfg.d, cfg.count, cfg.noise, cfg.seed);
  const TrainResult result = train_sort(ds, cfg);
  for (const EpochStat& row : result.curve) CHECK(std::isfinite(row.train_loss));
}

TEST_CASE("training is reproducible under a fixed seed") {
  TrainConfig cfg = small_sort_config();
  cfg.mode = TrainMode::kStochastic;
  cfg.n_samples = 2;
  cfg.epochs = 2;
  const SyntheticSequenceDataset ds =
      generate_sequences(cfg.n, cfg.d, cfg.count, cfg.noise, cfg.seed);
  const TrainResult a = train_sort(ds, cfg);
  const TrainResult b = train_sort(ds, cfg);
  REQUIRE(a.curve.size() == b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].train_loss == b.curve[i].train_loss);
    CHECK(a.curve[i].valid_metric == b.curve[i].valid_metric);
  }
  CHECK(a.metrics.exact_perm_accuracy == b.metrics.exact_perm_accuracy);
}

TEST_CASE("more Monte Carlo samples do not hurt the stochastic sort task") {
  TrainConfig cfg = small_sort_config();
  cfg.mode = TrainMode::kStochastic;
  const SyntheticSequenceDataset ds =
      generate_sequences(cfg.n, cfg.d, cfg.count, cfg.noise, cfg.seed);
  cfg.n_samples = 1;
  const double acc1 = train_sort(ds, cfg).metrics.element_rank_accuracy;
  cfg.n_samples = 5;
  const double acc5 = train_sort(ds, cfg).metrics.element_rank_accuracy;
  CHECK(acc5 >= acc1 - 0.15);
}

TEST_CASE("constant predictor has zero R^2") {
  const std::vector<double> y = {1.0, 2.0, 3.0, 4.0};
  const double mean = 2.5;
  CHECK(r_squared(y, {mean, mean, mean, mean}) == 0.0);
  CHECK(r_squared(y, y) == 1.0);
}

TEST_CASE("train_median requires odd n and improves R^2") {
  TrainConfig cfg;
  cfg.n = 5;
  cfg.d = 3;
  cfg.noise = 0.0;
  cfg.tau = 2.0;
  cfg.epochs = 6;
  cfg.lr = 0.3;
  cfg.count = 64;
  cfg.hidden = 8;
  cfg.seed = 17;
  const SyntheticSequenceDataset ds =
      generate_sequences(cfg.n, cfg.d, cfg.count, cfg.noise, cfg.seed);
  const TrainResult result = train_median(ds, cfg);
  CHECK(result.curve.back().train_loss < result.curve.front().train_loss);
  CHECK(result.metrics.r2 <= 1.0);
  CHECK(result.metrics.mse >= 0.0);

  const SyntheticSequenceDataset even = generate_sequences(4, 3, 8, 0.0, 17);
  CHECK_THROWS_AS(train_median(even, cfg), std::invalid_argument);
}

TEST_CASE("soft median row at tiny tau selects the hard median element") {
  Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    const int n = 5;
    const std::vector<double> s = oracle::grid_scores(n, rng);
    const Matrix p = relaxed_sort_matrix(s, 1e-3);
    const std::size_t mid0 = (static_cast<std::size_t>(n) + 1) / 2 - 1;
    const Permutation z = sort_permutation(ScoreVector(s));
    const std::size_t hard_item = static_cast<std::size_t>(z.item_at_rank(mid0 + 1) - 1);
    // soft selection weights concentrate on the hard median element
    for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j)
      CHECK(p(mid0, j) == doctest::Approx(j == hard_item ? 1.0 : 0.0).epsilon(1e-6));
  }
}

TEST_CASE("ring data generation shapes and determinism") {
  const KnnDataset a = make_rings(40, 20, 4, 0.1, 2.0, 5);
  CHECK(a.train.size() == 80);
  CHECK(a.valid.size() == 40);
  CHECK(a.test.size() == 40);
  CHECK(a.dim == 6);
  const KnnDataset b = make_rings(40, 20, 4, 0.1, 2.0, 5);
  CHECK(a.train.features == b.train.features);
  CHECK(a.train.labels == b.train.labels);
}

TEST_CASE("learned embedding beats raw kNN on well-separated blobs") {
  TrainConfig cfg;
  cfg.tau = 16.0;
  cfg.epochs = 2;
  cfg.lr = 0.02;
  cfg.hidden = 8;
  cfg.k = 3;
  cfg.n_candidates = 10;
  cfg.embed_dim = 2;
  cfg.seed = 29;
  const KnnDataset ds = make_blobs(40, 25, 4.0, 0.5, 31);
  const TrainResult result = train_knn(ds, cfg);
  const double raw = raw_knn_accuracy(ds, cfg.k);
  CHECK(result.metrics.knn_accuracy >= raw - 0.05);  // separable either way
  CHECK(result.metrics.knn_accuracy > 0.9);
}

TEST_CASE("train_knn validates its configuration") {
  const KnnDataset ds = make_blobs(10, 5, 4.0, 0.5, 31);
  TrainConfig cfg;
  cfg.n_candidates = 50;  // larger than the training split
  CHECK_THROWS_AS(train_knn(ds, cfg), std::invalid_argument);
  cfg.n_candidates = 10;
  cfg.k = 11;
  CHECK_THROWS_AS(train_knn(ds, cfg), std::invalid_argument);
}

TEST_CASE("variance sweep validates inputs and is repeatable") {
  TrainConfig cfg = small_sort_config();
  cfg.mode = TrainMode::kStochastic;
  const SyntheticSequenceDataset ds = generate_sequences(cfg.n, cfg.d, 4, cfg.noise, cfg.seed);

  CHECK_THROWS_AS(variance_sweep(ds, cfg, {1.0, 2.0}, 1, 5), std::invalid_argument);
  TrainConfig det = cfg;
  det.mode = TrainMode::kDeterministic;
  CHECK_THROWS_AS(variance_sweep(ds, det, {1.0, 2.0}, 16, 5), std::invalid_argument);

  const std::vector<SweepRow> rows = variance_sweep(ds, cfg, {1.0, 2.0, 4.0, 8.0, 16.0}, 64, 5);
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(std::isfinite(rows[i].log_variance));

  // two seeds agree within generous Monte Carlo bands
  const std::vector<SweepRow> again = variance_sweep(ds, cfg, {1.0, 2.0, 4.0, 8.0, 16.0}, 64, 5);
  for (std::size_t i = 0; i < rows.size(); ++i)
    CHECK(rows[i].log_variance == again[i].log_variance);
  const std::vector<SweepRow> other = variance_sweep(ds, cfg, {1.0, 2.0, 4.0, 8.0, 16.0}, 64, 6);
  for (std::size_t i = 0; i < rows.size(); ++i)
    CHECK(std::abs(rows[i].log_variance - other[i].log_variance) < 2.0);
}

TEST_CASE("variance sweep trend is non-increasing at scale") {
  TrainConfig cfg = small_sort_config();
  cfg.mode = TrainMode::kStochastic;
  cfg.n = 5;
  cfg.d = 4;
  const SyntheticSequenceDataset ds = generate_sequences(cfg.n, cfg.d, 4, 0.05, 21);
  const std::vector<SweepRow> rows = variance_sweep(ds, cfg, {1.0, 2.0, 4.0, 8.0, 16.0}, 512, 21);
  int inversions = 0;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i + 1].log_variance > rows[i].log_variance) ++inversions;
  CHECK(inversions <= 1);
  CHECK(rows.back().log_variance < rows.front().log_variance);
}

TEST_CASE("a broken relaxation is caught by the unimodality fuzz") {
  // wrong coefficient: drops the argmax-permutation structure
  const RelaxFn broken = [](const std::vector<double>& s, double tau) {
    const std::size_t n = s.size();
    Matrix logits(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) logits(i, j) = s[j] * s[j];
    return softmax_rows(logits, tau);
  };
  const PropertyResult result = check_unimodality_fuzz(2000, 3, broken);
  CHECK_FALSE(result.passed);
  CHECK(!result.detail.empty());

  // and the real implementation passes the same fuzz
  CHECK(check_unimodality_fuzz(2000, 3).passed);
}

TEST_CASE("validation suite passes on the real implementation") {
  for (const PropertyResult& r : run_validation_suite(42)) {
    INFO(r.name, ": ", r.detail);
    CHECK(r.passed);
  }
}
