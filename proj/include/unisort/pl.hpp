#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "unisort/autodiff.hpp"
#include "unisort/relaxation.hpp"

namespace unisort {

// Parameters of the Plackett-Luce distribution over permutations: strictly
// positive scores plus the Gumbel scale beta (default 1).
struct PLParams {
  explicit PLParams(ScoreVector s, double beta_in = 1.0);
  ScoreVector scores;
  double beta;
};

// Standard Gumbel(0,1) draws, reproducible from the seed.
struct GumbelNoise {
  std::vector<double> g;
  std::uint64_t seed = 0;
};

// Monte Carlo gradient estimate with per-sample gradients retained so
// variance and standard errors can be computed.
struct EstimatorReport {
  std::vector<double> estimate;                 // mean of per_sample
  std::size_t n_samples = 0;
  std::vector<std::vector<double>> per_sample;  // one gradient per draw
  std::vector<double> objective_values;         // f at each draw

  std::vector<double> variance() const;   // per-coordinate, unbiased
  std::vector<double> std_error() const;  // sqrt(variance / n_samples)
};

// log q(z | s) = sum_i [ log s_{z_i} - log (Z - sum_{k<i} s_{z_k}) ].
double pl_log_pmf(const PLParams& params, const Permutation& z);

// Analytic d/ds_j log q(z|s); kept independent of the tape.
std::vector<double> pl_grad_log_pmf(const PLParams& params, const Permutation& z);

// Exact expectation sum_z q(z|s) f(z) over all n! permutations; n <= 8.
double enumerate_expectation(const PLParams& params,
                             const std::function<double(const Permutation&)>& f);

// g = -log(-log(U + eps) + eps), U uniform on [0,1).
GumbelNoise sample_gumbel(std::size_t count, std::uint64_t seed, double eps = 1e-10);

// Sorts beta * log s + beta * g; the induced law over permutations is the
// PL distribution for any fixed beta.
Permutation pl_sample_hard(const PLParams& params, std::uint64_t seed);

// relaxed_sort applied to the same perturbed vector the hard sampler sorts,
// so project_hard of the result coincides with pl_sample_hard per seed.
UnimodalMatrix pl_sample_relaxed(const PLParams& params, Temperature tau, std::uint64_t seed);

// Score-function estimator: mean over hard samples of f(z) * grad log q(z|s).
// The direct-dependence term vanishes because f takes only the permutation.
EstimatorReport reinforce_gradient(const PLParams& params,
                                   const std::function<double(const Permutation&)>& f,
                                   std::size_t n_samples, std::uint64_t seed);

// Objective built on a tape from the (relaxed or straight-through) sort
// matrix; must return a 1x1 value.
using RelaxedObjective = std::function<ad::Var(ad::Tape&, ad::Var)>;

// Reparameterized estimator: mean over Gumbel draws of the backward gradient
// of f(relaxed_sort(beta log s + g, tau)) with respect to the scores.
EstimatorReport reparam_gradient(const PLParams& params, const RelaxedObjective& f,
                                 Temperature tau, std::size_t n_samples, std::uint64_t seed);

// As reparam_gradient, but f sees the hard projected matrix in the forward
// pass while its adjoint flows through the relaxed matrix.
EstimatorReport straight_through_gradient(const PLParams& params, const RelaxedObjective& f,
                                          Temperature tau, std::size_t n_samples,
                                          std::uint64_t seed);

}  // namespace unisort
