#pragma once

#include <cstdint>
#include <vector>

#include "unisort/data.hpp"
#include "unisort/matrix.hpp"

namespace unisort {

enum class TrainMode { kDeterministic, kStochastic, kStraightThrough };

struct TrainConfig {
  int n = 5;
  int d = 4;
  double noise = 0.05;
  double tau = 4.0;
  TrainMode mode = TrainMode::kDeterministic;
  int epochs = 20;
  double lr = 0.5;
  int n_samples = 5;  // Monte Carlo draws per step in stochastic modes
  std::uint64_t seed = 42;
  int hidden = 16;
  int count = 384;  // training sequences / queries
  // kNN-specific
  int k = 5;
  int n_candidates = 20;
  int embed_dim = 2;
};

struct MetricsRecord {
  double exact_perm_accuracy = 0.0;
  double element_rank_accuracy = 0.0;
  double mse = 0.0;
  double r2 = 0.0;
  double knn_accuracy = 0.0;
};

struct EpochStat {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_metric = 0.0;
};

struct TrainResult {
  MetricsRecord metrics;
  std::vector<EpochStat> curve;
};

// Learns a shared per-item score model so that sorting the scores reproduces
// the ground-truth ordering; cross-entropy between the true permutation
// matrix and the relaxed sort of the scores. Reports permutation and
// element-rank accuracy on the test split, evaluated via hard projection.
TrainResult train_sort(const SyntheticSequenceDataset& ds, const TrainConfig& cfg);

// Joint training of a score model and a regressor reading the soft-selected
// median row; squared-error objective. Requires odd n. Reports test MSE and
// R^2, evaluated via hard projection.
TrainResult train_median(const SyntheticSequenceDataset& ds, const TrainConfig& cfg);

// Metric learning: embeds points so the k nearest candidates share the query
// label, trained with the relaxed top-k loss over a sampled candidate pool.
// Evaluation votes over the entire training set with hard projection.
TrainResult train_knn(const KnnDataset& ds, const TrainConfig& cfg);

// Hard kNN majority vote in the raw feature space; the baseline the learned
// embedding has to beat.
double raw_knn_accuracy(const KnnDataset& ds, int k);

// 1 - SS_res / SS_tot.
double r_squared(const std::vector<double>& y_true, const std::vector<double>& y_pred);

struct SweepRow {
  double tau = 0.0;
  double log_variance = 0.0;
  double log_variance_se = 0.0;  // batch-means standard error
};

// Per-coordinate variance of per-sample score-model gradients on the
// stochastic sort objective, aggregated as log mean variance, one row per
// temperature. Common random numbers across temperatures. Monotonicity is
// reported by callers, not enforced here.
std::vector<SweepRow> variance_sweep(const SyntheticSequenceDataset& ds, const TrainConfig& cfg,
                                     const std::vector<double>& taus, int n_samples,
                                     std::uint64_t seed);

}  // namespace unisort
