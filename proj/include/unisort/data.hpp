#pragma once

#include <cstdint>
#include <vector>

#include "unisort/matrix.hpp"

namespace unisort {

// One training example for the ordering tasks: n items, each a d-dimensional
// feature vector encoding an underlying scalar value. Values are distinct
// within a sequence so the ground-truth permutation is unique.
struct Sequence {
  Matrix features;             // n x d
  std::vector<double> values;  // length n
};

struct SyntheticSequenceDataset {
  std::vector<Sequence> train, valid, test;
  int n = 0;
  int d = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

// Each item's value v is drawn uniformly (with a minimum pairwise separation;
// degenerate draws are regenerated) and encoded as features a_j * v plus
// Gaussian noise. The first encoding coefficient is 1, the rest are random in
// [0.5, 1.5], so d=1 with zero noise yields features equal to the values.
// Splits get `count`, max(count/4,1) and max(count/2,1) sequences.
SyntheticSequenceDataset generate_sequences(int n, int d, int count, double noise,
                                            std::uint64_t seed);

// Labeled point cloud for the kNN task.
struct LabeledPoints {
  Matrix features;  // count x dim
  std::vector<int> labels;
  std::size_t size() const { return labels.size(); }
};

struct KnnDataset {
  LabeledPoints train, valid, test;
  int dim = 0;
};

// Two concentric rings (radii 1 and 2) in the first two dimensions plus
// `distractor_dims` high-variance noise dimensions that swamp raw Euclidean
// distances; a learned embedding has to discard them.
KnnDataset make_rings(int per_class_train, int per_class_eval, int distractor_dims,
                      double ring_noise, double distractor_scale, std::uint64_t seed);

// Two Gaussian blobs in 2D separated along the first axis.
KnnDataset make_blobs(int per_class_train, int per_class_eval, double separation, double spread,
                      std::uint64_t seed);

}  // namespace unisort
