#include "unisort/data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "unisort/rng.hpp"

namespace unisort {

namespace {

std::vector<double> draw_separated_values(int n, Rng& rng) {
  const double gap = std::min(0.1, 0.5 / static_cast<double>(n));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.uniform01();
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    bool ok = true;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
      if (sorted[i + 1] - sorted[i] < gap) ok = false;
    if (ok) return v;
  }
  throw std::runtime_error("generate_sequences: could not draw separated values");
}

Sequence make_sequence(int n, int d, double noise, const std::vector<double>& encoding,
                       Rng& rng) {
  Sequence seq;
  seq.values = draw_separated_values(n, rng);
  seq.features = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      seq.features(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          encoding[static_cast<std::size_t>(j)] * seq.values[static_cast<std::size_t>(i)] +
          noise * rng.gaussian();
  return seq;
}

}  // namespace

SyntheticSequenceDataset generate_sequences(int n, int d, int count, double noise,
                                            std::uint64_t seed) {
  if (n < 2 || d < 1 || count < 1)
    throw std::invalid_argument("generate_sequences: need n >= 2, d >= 1, count >= 1");
  if (noise < 0.0) throw std::invalid_argument("generate_sequences: noise must be >= 0");

  SyntheticSequenceDataset ds;
  ds.n = n;
  ds.d = d;
  ds.noise = noise;
  ds.seed = seed;

  Rng rng = Rng::stream(seed, 0);
  std::vector<double> encoding(static_cast<std::size_t>(d));
  encoding[0] = 1.0;
  for (int j = 1; j < d; ++j) encoding[static_cast<std::size_t>(j)] = rng.uniform(0.5, 1.5);

  const int n_valid = std::max(count / 4, 1);
  const int n_test = std::max(count / 2, 1);
  ds.train.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) ds.train.push_back(make_sequence(n, d, noise, encoding, rng));
  for (int i = 0; i < n_valid; ++i) ds.valid.push_back(make_sequence(n, d, noise, encoding, rng));
  for (int i = 0; i < n_test; ++i) ds.test.push_back(make_sequence(n, d, noise, encoding, rng));
  return ds;
}

namespace {

LabeledPoints make_ring_points(int per_class, int distractor_dims, double ring_noise,
                               double distractor_scale, Rng& rng) {
  const int dim = 2 + distractor_dims;
  LabeledPoints pts;
  pts.features = Matrix(static_cast<std::size_t>(2 * per_class), static_cast<std::size_t>(dim));
  pts.labels.resize(static_cast<std::size_t>(2 * per_class));
  for (int c = 0; c < 2; ++c) {
    const double radius = c == 0 ? 1.0 : 2.0;
    for (int i = 0; i < per_class; ++i) {
      const std::size_t row = static_cast<std::size_t>(c * per_class + i);
      const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      const double r = radius + ring_noise * rng.gaussian();
      pts.features(row, 0) = r * std::cos(angle);
      pts.features(row, 1) = r * std::sin(angle);
      for (int j = 0; j < distractor_dims; ++j)
        pts.features(row, static_cast<std::size_t>(2 + j)) = distractor_scale * rng.gaussian();
      pts.labels[row] = c;
    }
  }
  return pts;
}

LabeledPoints make_blob_points(int per_class, double separation, double spread, Rng& rng) {
  LabeledPoints pts;
  pts.features = Matrix(static_cast<std::size_t>(2 * per_class), 2);
  pts.labels.resize(static_cast<std::size_t>(2 * per_class));
  for (int c = 0; c < 2; ++c) {
    const double center = (c == 0 ? -0.5 : 0.5) * separation;
    for (int i = 0; i < per_class; ++i) {
      const std::size_t row = static_cast<std::size_t>(c * per_class + i);
      pts.features(row, 0) = center + spread * rng.gaussian();
      pts.features(row, 1) = spread * rng.gaussian();
      pts.labels[row] = c;
    }
  }
  return pts;
}

}  // namespace

KnnDataset make_rings(int per_class_train, int per_class_eval, int distractor_dims,
                      double ring_noise, double distractor_scale, std::uint64_t seed) {
  if (per_class_train < 1 || per_class_eval < 1 || distractor_dims < 0)
    throw std::invalid_argument("make_rings: invalid sizes");
  Rng rng = Rng::stream(seed, 1);
  KnnDataset ds;
  ds.dim = 2 + distractor_dims;
  ds.train = make_ring_points(per_class_train, distractor_dims, ring_noise, distractor_scale, rng);
  ds.valid = make_ring_points(per_class_eval, distractor_dims, ring_noise, distractor_scale, rng);
  ds.test = make_ring_points(per_class_eval, distractor_dims, ring_noise, distractor_scale, rng);
  return ds;
}

KnnDataset make_blobs(int per_class_train, int per_class_eval, double separation, double spread,
                      std::uint64_t seed) {
  if (per_class_train < 1 || per_class_eval < 1)
    throw std::invalid_argument("make_blobs: invalid sizes");
  Rng rng = Rng::stream(seed, 2);
  KnnDataset ds;
  ds.dim = 2;
  ds.train = make_blob_points(per_class_train, separation, spread, rng);
  ds.valid = make_blob_points(per_class_eval, separation, spread, rng);
  ds.test = make_blob_points(per_class_eval, separation, spread, rng);
  return ds;
}

}  // namespace unisort
