#include "unisort/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "unisort/autodiff.hpp"
#include "unisort/losses.hpp"
#include "unisort/models.hpp"
#include "unisort/relaxation.hpp"
#include "unisort/rng.hpp"

namespace unisort {

namespace {

void validate_common(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr))
    throw std::invalid_argument("train: lr must be positive");
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau))
    throw std::invalid_argument("train: tau must be positive");
  if (cfg.n_samples < 1) throw std::invalid_argument("train: n_samples must be >= 1");
  if (cfg.hidden < 1) throw std::invalid_argument("train: hidden must be >= 1");
}

std::vector<std::size_t> shuffled_indices(std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

void guard_finite(double loss, const char* task, int epoch) {
  if (!std::isfinite(loss))
    throw std::runtime_error(std::string("train_") + task + ": non-finite loss at epoch " +
                             std::to_string(epoch));
}

std::vector<double> column_vector(const Matrix& m) { return m.data(); }

Permutation hard_prediction(const std::vector<double>& scores, double tau) {
  return project_hard(relaxed_sort_matrix(scores, tau));
}

struct SortEval {
  double exact = 0.0;
  double element = 0.0;
};

SortEval evaluate_sort(const Mlp& model, const std::vector<Sequence>& split, double tau) {
  SortEval eval;
  if (split.empty()) return eval;
  for (const Sequence& seq : split) {
    const Permutation pred = hard_prediction(column_vector(model.forward_eager(seq.features)), tau);
    const Permutation truth = sort_permutation(ScoreVector(seq.values));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (pred.indices()[i] == truth.indices()[i]) ++hits;
    eval.element += static_cast<double>(hits) / static_cast<double>(truth.size());
    eval.exact += pred == truth ? 1.0 : 0.0;
  }
  eval.exact /= static_cast<double>(split.size());
  eval.element /= static_cast<double>(split.size());
  return eval;
}

// Mean stochastic objective: f maps each relaxed (or straight-through)
// matrix to a scalar term; noise seeds advance a shared counter.
template <typename TermFn>
ad::Var stochastic_mean(ad::Tape& tape, ad::Var scores, const TrainConfig& cfg,
                        std::uint64_t& noise_counter, const TermFn& term) {
  ad::Var acc{};
  for (int m = 0; m < cfg.n_samples; ++m) {
    const GumbelNoise noise = sample_gumbel(scores.rows(), mix_seed(cfg.seed, 0x100000 + noise_counter));
    ++noise_counter;
    ad::Var perturbed = ad::add(scores, tape.constant(Matrix::column(noise.g)));
    ad::Var relaxed = ad::relaxed_sort(tape, perturbed, cfg.tau);
    if (cfg.mode == TrainMode::kStraightThrough)
      relaxed = ad::straight_through(relaxed, permutation_to_matrix(project_hard(relaxed.value())));
    ad::Var t = term(relaxed);
    acc = m == 0 ? t : ad::add(acc, t);
  }
  return ad::scale(acc, 1.0 / static_cast<double>(cfg.n_samples));
}

}  // namespace

double r_squared(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty())
    throw std::invalid_argument("r_squared: size mismatch");
  const double mean =
      std::accumulate(y_true.begin(), y_true.end(), 0.0) / static_cast<double>(y_true.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

TrainResult train_sort(const SyntheticSequenceDataset& ds, const TrainConfig& cfg) {
  validate_common(cfg);
  if (ds.train.empty()) throw std::invalid_argument("train_sort: empty training split");

  Rng init_rng = Rng::stream(cfg.seed, 100);
  Mlp model = Mlp::init(ds.d, cfg.hidden, 1, init_rng);
  SgdOptimizer opt{cfg.lr, 0.0, {}};
  Rng shuffle_rng = Rng::stream(cfg.seed, 101);
  std::uint64_t noise_counter = 0;

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t idx : shuffled_indices(ds.train.size(), shuffle_rng)) {
      const Sequence& seq = ds.train[idx];
      const Matrix p_true = permutation_to_matrix(sort_permutation(ScoreVector(seq.values)));

      ad::Tape tape;
      Mlp::TapeVars vars = model.to_tape(tape);
      ad::Var x = tape.constant(seq.features);
      ad::Var scores = Mlp::forward(tape, vars, x);
      ad::Var loss{};
      if (cfg.mode == TrainMode::kDeterministic) {
        loss = cross_entropy_rows(tape, p_true, ad::relaxed_sort(tape, scores, cfg.tau));
      } else {
        loss = stochastic_mean(tape, scores, cfg, noise_counter, [&](ad::Var relaxed) {
          return cross_entropy_rows(tape, p_true, relaxed);
        });
      }
      guard_finite(loss.value()[0], "sort", epoch);
      loss_sum += loss.value()[0];
      tape.backward(loss);
      opt.step(model.params(),
               {&vars.w1.adjoint(), &vars.b1.adjoint(), &vars.w2.adjoint(), &vars.b2.adjoint()});
    }
    const SortEval valid = evaluate_sort(model, ds.valid, cfg.tau);
    result.curve.push_back(
        {epoch, loss_sum / static_cast<double>(ds.train.size()), valid.exact});
  }

  const SortEval test = evaluate_sort(model, ds.test, cfg.tau);
  result.metrics.exact_perm_accuracy = test.exact;
  result.metrics.element_rank_accuracy = test.element;
  return result;
}

namespace {

struct MedianEval {
  double mse = 0.0;
  double r2 = 0.0;
};

double median_target(const Sequence& seq) {
  const Permutation truth = sort_permutation(ScoreVector(seq.values));
  const std::size_t mid = (seq.values.size() + 1) / 2;
  return seq.values[static_cast<std::size_t>(truth.item_at_rank(mid) - 1)];
}

MedianEval evaluate_median(const Mlp& score_model, const Mlp& regressor,
                           const std::vector<Sequence>& split, double tau) {
  MedianEval eval;
  if (split.empty()) return eval;
  std::vector<double> y_true, y_pred;
  const std::size_t mid = (split.front().values.size() + 1) / 2;
  for (const Sequence& seq : split) {
    const Permutation pred =
        hard_prediction(column_vector(score_model.forward_eager(seq.features)), tau);
    const std::size_t item = static_cast<std::size_t>(pred.item_at_rank(mid) - 1);
    Matrix x_med(1, seq.features.cols());
    for (std::size_t j = 0; j < seq.features.cols(); ++j) x_med(0, j) = seq.features(item, j);
    y_pred.push_back(regressor.forward_eager(x_med)[0]);
    y_true.push_back(median_target(seq));
  }
  double se = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    se += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  eval.mse = se / static_cast<double>(y_true.size());
  eval.r2 = r_squared(y_true, y_pred);
  return eval;
}

}  // namespace

TrainResult train_median(const SyntheticSequenceDataset& ds, const TrainConfig& cfg) {
  validate_common(cfg);
  if (ds.train.empty()) throw std::invalid_argument("train_median: empty training split");
  if (ds.n % 2 == 0) throw std::invalid_argument("train_median: n must be odd");

  Rng score_rng = Rng::stream(cfg.seed, 110);
  Rng reg_rng = Rng::stream(cfg.seed, 111);
  Mlp score_model = Mlp::init(ds.d, cfg.hidden, 1, score_rng);
  Mlp regressor = Mlp::init(ds.d, cfg.hidden, 1, reg_rng);
  SgdOptimizer opt{cfg.lr, 0.0, {}};
  Rng shuffle_rng = Rng::stream(cfg.seed, 112);
  std::uint64_t noise_counter = 0;
  const std::size_t mid0 = static_cast<std::size_t>((ds.n + 1) / 2 - 1);

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t idx : shuffled_indices(ds.train.size(), shuffle_rng)) {
      const Sequence& seq = ds.train[idx];
      const double y = median_target(seq);

      ad::Tape tape;
      Mlp::TapeVars svars = score_model.to_tape(tape);
      Mlp::TapeVars rvars = regressor.to_tape(tape);
      ad::Var x = tape.constant(seq.features);
      ad::Var scores = Mlp::forward(tape, svars, x);
      const auto term = [&](ad::Var relaxed) {
        ad::Var x_med = ad::matmul(ad::select_row(relaxed, mid0), x);
        return mse(tape, y, Mlp::forward(tape, rvars, x_med));
      };
      ad::Var loss{};
      if (cfg.mode == TrainMode::kDeterministic)
        loss = term(ad::relaxed_sort(tape, scores, cfg.tau));
      else
        loss = stochastic_mean(tape, scores, cfg, noise_counter, term);
      guard_finite(loss.value()[0], "median", epoch);
      loss_sum += loss.value()[0];
      tape.backward(loss);
      std::vector<Matrix*> params = score_model.params();
      for (Matrix* p : regressor.params()) params.push_back(p);
      opt.step(params,
               {&svars.w1.adjoint(), &svars.b1.adjoint(), &svars.w2.adjoint(),
                &svars.b2.adjoint(), &rvars.w1.adjoint(), &rvars.b1.adjoint(),
                &rvars.w2.adjoint(), &rvars.b2.adjoint()});
    }
    const MedianEval valid = evaluate_median(score_model, regressor, ds.valid, cfg.tau);
    result.curve.push_back({epoch, loss_sum / static_cast<double>(ds.train.size()), valid.r2});
  }

  const MedianEval test = evaluate_median(score_model, regressor, ds.test, cfg.tau);
  result.metrics.mse = test.mse;
  result.metrics.r2 = test.r2;
  return result;
}

namespace {

std::vector<double> squared_distances(const Matrix& points, const Matrix& query_row) {
  std::vector<double> d(points.rows(), 0.0);
  for (std::size_t i = 0; i < points.rows(); ++i)
    for (std::size_t j = 0; j < points.cols(); ++j) {
      const double diff = points(i, j) - query_row(0, j);
      d[i] += diff * diff;
    }
  return d;
}

int vote_top_k(const std::vector<double>& dists, const std::vector<int>& labels, int k) {
  std::vector<std::size_t> order(dists.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dists[a] < dists[b] || (dists[a] == dists[b] && a < b);
  });
  std::map<int, int> counts;
  for (int j = 0; j < k; ++j) ++counts[labels[order[static_cast<std::size_t>(j)]]];
  int best_label = counts.begin()->first, best = 0;
  for (const auto& [label, c] : counts) {
    if (c > best) {
      best = c;
      best_label = label;
    }
  }
  return best_label;
}

Matrix point_row(const LabeledPoints& pts, std::size_t i) {
  Matrix row(1, pts.features.cols());
  for (std::size_t j = 0; j < pts.features.cols(); ++j) row(0, j) = pts.features(i, j);
  return row;
}

// Accuracy of a hard kNN vote over the full training set, in the space
// defined by `embed` (identity for the raw baseline).
template <typename EmbedFn>
double knn_vote_accuracy(const LabeledPoints& train, const LabeledPoints& eval_split, int k,
                         const EmbedFn& embed) {
  const Matrix train_embedded = embed(train.features);
  std::size_t hits = 0;
  for (std::size_t q = 0; q < eval_split.size(); ++q) {
    const Matrix query = embed(point_row(eval_split, q));
    const std::vector<double> d = squared_distances(train_embedded, query);
    if (vote_top_k(d, train.labels, k) == eval_split.labels[q]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(eval_split.size());
}

}  // namespace

double raw_knn_accuracy(const KnnDataset& ds, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > ds.train.size())
    throw std::invalid_argument("raw_knn_accuracy: k out of range");
  return knn_vote_accuracy(ds.train, ds.test, k, [](const Matrix& m) { return m; });
}

TrainResult train_knn(const KnnDataset& ds, const TrainConfig& cfg) {
  validate_common(cfg);
  const std::size_t n_train = ds.train.size();
  if (n_train < 2) throw std::invalid_argument("train_knn: need at least two training points");
  if (cfg.n_candidates < 2 || static_cast<std::size_t>(cfg.n_candidates) >= n_train)
    throw std::invalid_argument("train_knn: n_candidates must be in [2, train size)");
  if (cfg.k < 1 || cfg.k > cfg.n_candidates)
    throw std::invalid_argument("train_knn: k must be in [1, n_candidates]");
  if (cfg.embed_dim < 1) throw std::invalid_argument("train_knn: embed_dim must be >= 1");

  Rng init_rng = Rng::stream(cfg.seed, 120);
  Mlp model = Mlp::init(ds.dim, cfg.hidden, cfg.embed_dim, init_rng);
  SgdOptimizer opt{cfg.lr, 0.9, {}};  // momentum 0.9 for the metric-learning task
  Rng shuffle_rng = Rng::stream(cfg.seed, 121);
  Rng cand_rng = Rng::stream(cfg.seed, 122);
  std::uint64_t noise_counter = 0;
  const std::size_t m = static_cast<std::size_t>(cfg.n_candidates);

  const auto embed = [&model](const Matrix& x) { return model.forward_eager(x); };

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t q : shuffled_indices(n_train, shuffle_rng)) {
      // candidate pool: sample without replacement from the training split,
      // excluding the query point
      std::vector<std::size_t> pool;
      pool.reserve(n_train - 1);
      for (std::size_t i = 0; i < n_train; ++i)
        if (i != q) pool.push_back(i);
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(cand_rng.uniform_int(
                                      0, static_cast<int>(pool.size() - i) - 1));
        std::swap(pool[i], pool[j]);
      }

      Matrix cand_features(m, static_cast<std::size_t>(ds.dim));
      LabelVector cand_labels(m);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < static_cast<std::size_t>(ds.dim); ++j)
          cand_features(i, j) = ds.train.features(pool[i], j);
        cand_labels[i] = ds.train.labels[pool[i]];
      }
      const int y_query = ds.train.labels[q];

      ad::Tape tape;
      Mlp::TapeVars vars = model.to_tape(tape);
      ad::Var xc = tape.constant(cand_features);
      ad::Var xq = tape.constant(point_row(ds.train, q));
      ad::Var ec = Mlp::forward(tape, vars, xc);
      ad::Var eq = Mlp::forward(tape, vars, xq);
      ad::Var diff = ad::sub(ec, ad::broadcast(eq, m, static_cast<std::size_t>(cfg.embed_dim)));
      ad::Var ones = tape.constant(Matrix(static_cast<std::size_t>(cfg.embed_dim), 1, 1.0));
      ad::Var scores = ad::scale(ad::matmul(ad::square(diff), ones), -1.0);

      const auto term = [&](ad::Var relaxed) {
        return knn_loss(tape, ad::transpose(relaxed), y_query, cand_labels, cfg.k);
      };
      ad::Var loss{};
      if (cfg.mode == TrainMode::kDeterministic)
        loss = term(ad::relaxed_sort(tape, scores, cfg.tau));
      else
        loss = stochastic_mean(tape, scores, cfg, noise_counter, term);
      guard_finite(loss.value()[0], "knn", epoch);
      loss_sum += loss.value()[0];
      tape.backward(loss);
      opt.step(model.params(),
               {&vars.w1.adjoint(), &vars.b1.adjoint(), &vars.w2.adjoint(), &vars.b2.adjoint()});
    }
    const double valid_acc = knn_vote_accuracy(ds.train, ds.valid, cfg.k, embed);
    result.curve.push_back({epoch, loss_sum / static_cast<double>(n_train), valid_acc});
  }

  result.metrics.knn_accuracy = knn_vote_accuracy(ds.train, ds.test, cfg.k, embed);
  return result;
}

std::vector<SweepRow> variance_sweep(const SyntheticSequenceDataset& ds, const TrainConfig& cfg,
                                     const std::vector<double>& taus, int n_samples,
                                     std::uint64_t seed) {
  if (cfg.mode != TrainMode::kStochastic)
    throw std::invalid_argument("variance_sweep: requires stochastic mode");
  if (n_samples < 2) throw std::invalid_argument("variance_sweep: variance needs n_samples >= 2");
  if (taus.empty()) throw std::invalid_argument("variance_sweep: no temperatures given");
  if (ds.train.empty()) throw std::invalid_argument("variance_sweep: empty training split");

  Rng init_rng = Rng::stream(seed, 130);
  Mlp model = Mlp::init(ds.d, cfg.hidden, 1, init_rng);
  const Sequence& seq = ds.train.front();
  const Matrix p_true = permutation_to_matrix(sort_permutation(ScoreVector(seq.values)));

  std::vector<SweepRow> rows;
  for (double tau : taus) {
    if (!(tau > 0.0)) throw std::invalid_argument("variance_sweep: tau must be positive");
    const std::size_t dim = model.param_count();
    std::vector<std::vector<double>> grads;
    grads.reserve(static_cast<std::size_t>(n_samples));
    for (int mdraw = 0; mdraw < n_samples; ++mdraw) {
      // same noise stream for every tau (common random numbers)
      const GumbelNoise noise =
          sample_gumbel(static_cast<std::size_t>(ds.n), mix_seed(seed, static_cast<std::uint64_t>(mdraw)));
      ad::Tape tape;
      Mlp::TapeVars vars = model.to_tape(tape);
      ad::Var x = tape.constant(seq.features);
      ad::Var scores = Mlp::forward(tape, vars, x);
      ad::Var perturbed = ad::add(scores, tape.constant(Matrix::column(noise.g)));
      ad::Var loss = cross_entropy_rows(tape, p_true, ad::relaxed_sort(tape, perturbed, tau));
      tape.backward(loss);
      grads.push_back(Mlp::flat_grads(vars));
    }
    // per-coordinate unbiased variance, averaged over coordinates
    std::vector<double> mean(dim, 0.0);
    for (const auto& g : grads)
      for (std::size_t i = 0; i < dim; ++i) mean[i] += g[i];
    for (double& v : mean) v /= static_cast<double>(n_samples);
    double var_total = 0.0;
    for (const auto& g : grads)
      for (std::size_t i = 0; i < dim; ++i) var_total += (g[i] - mean[i]) * (g[i] - mean[i]);
    const double mean_var =
        var_total / static_cast<double>(n_samples - 1) / static_cast<double>(dim);

    // batch-means standard error of the log statistic
    const int n_batches = std::min(10, n_samples / 2);
    double se = 0.0;
    if (n_batches >= 2) {
      std::vector<double> batch_logs;
      const int per = n_samples / n_batches;
      for (int b = 0; b < n_batches; ++b) {
        std::vector<double> bmean(dim, 0.0);
        for (int s = b * per; s < (b + 1) * per; ++s)
          for (std::size_t i = 0; i < dim; ++i) bmean[i] += grads[static_cast<std::size_t>(s)][i];
        for (double& v : bmean) v /= static_cast<double>(per);
        double bvar = 0.0;
        for (int s = b * per; s < (b + 1) * per; ++s)
          for (std::size_t i = 0; i < dim; ++i) {
            const double d = grads[static_cast<std::size_t>(s)][i] - bmean[i];
            bvar += d * d;
          }
        bvar = bvar / std::max(1.0, static_cast<double>(per - 1)) / static_cast<double>(dim);
        batch_logs.push_back(std::log(std::max(bvar, 1e-300)));
      }
      double bl_mean = std::accumulate(batch_logs.begin(), batch_logs.end(), 0.0) /
                       static_cast<double>(n_batches);
      double bl_var = 0.0;
      for (double v : batch_logs) bl_var += (v - bl_mean) * (v - bl_mean);
      bl_var /= static_cast<double>(n_batches - 1);
      se = std::sqrt(bl_var / static_cast<double>(n_batches));
    }
    rows.push_back({tau, std::log(std::max(mean_var, 1e-300)), se});
  }
  return rows;
}

}  // namespace unisort
