#include "unisort/pl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "unisort/rng.hpp"

namespace unisort {

PLParams::PLParams(ScoreVector s, double beta_in) : scores(std::move(s)), beta(beta_in) {
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!(scores[i] > 0.0)) throw std::invalid_argument("PLParams: scores must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("PLParams: beta must be positive and finite");
}

std::vector<double> EstimatorReport::variance() const {
  const std::size_t dim = estimate.size();
  std::vector<double> var(dim, 0.0);
  if (n_samples < 2) return var;
  for (const auto& g : per_sample)
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = g[i] - estimate[i];
      var[i] += d * d;
    }
  for (double& v : var) v /= static_cast<double>(n_samples - 1);
  return var;
}

std::vector<double> EstimatorReport::std_error() const {
  std::vector<double> se = variance();
  for (double& v : se) v = std::sqrt(v / static_cast<double>(n_samples));
  return se;
}

double pl_log_pmf(const PLParams& params, const Permutation& z) {
  const std::size_t n = params.scores.size();
  if (z.size() != n) throw std::invalid_argument("pl_log_pmf: size mismatch");
  double remaining = 0.0;
  for (std::size_t i = 0; i < n; ++i) remaining += params.scores[i];
  double logp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double si = params.scores[static_cast<std::size_t>(z.indices()[i] - 1)];
    logp += std::log(si) - std::log(remaining);
    remaining -= si;
  }
  return logp;
}

std::vector<double> pl_grad_log_pmf(const PLParams& params, const Permutation& z) {
  const std::size_t n = params.scores.size();
  if (z.size() != n) throw std::invalid_argument("pl_grad_log_pmf: size mismatch");
  // D_i = Z - sum_{k<i} s_{z_k}; d/ds_j log q = 1/s_j - sum_{i <= rank(j)} 1/D_i
  std::vector<double> denom(n);
  double remaining = 0.0;
  for (std::size_t i = 0; i < n; ++i) remaining += params.scores[i];
  for (std::size_t i = 0; i < n; ++i) {
    denom[i] = remaining;
    remaining -= params.scores[static_cast<std::size_t>(z.indices()[i] - 1)];
  }
  std::vector<double> prefix(n);  // prefix[i] = sum_{t<=i} 1/D_t
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += 1.0 / denom[i];
    prefix[i] = acc;
  }
  std::vector<double> grad(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    const std::size_t j = static_cast<std::size_t>(z.indices()[rank] - 1);
    grad[j] = 1.0 / params.scores[j] - prefix[rank];
  }
  return grad;
}

double enumerate_expectation(const PLParams& params,
                             const std::function<double(const Permutation&)>& f) {
  const std::size_t n = params.scores.size();
  if (n > 8) throw std::invalid_argument("enumerate_expectation: n must be <= 8");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 1);
  double total = 0.0;
  do {
    const Permutation z(idx);
    total += std::exp(pl_log_pmf(params, z)) * f(z);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return total;
}

GumbelNoise sample_gumbel(std::size_t count, std::uint64_t seed, double eps) {
  if (eps < 0.0) throw std::invalid_argument("sample_gumbel: eps must be >= 0");
  Rng rng(seed);
  GumbelNoise noise;
  noise.seed = seed;
  noise.g.resize(count);
  for (std::size_t i = 0; i < count; ++i) noise.g[i] = rng.gumbel(eps);
  return noise;
}

namespace {

std::vector<double> perturbed_log_scores(const PLParams& params, const GumbelNoise& noise) {
  std::vector<double> out(params.scores.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = params.beta * std::log(params.scores[i]) + params.beta * noise.g[i];
  return out;
}

}  // namespace

Permutation pl_sample_hard(const PLParams& params, std::uint64_t seed) {
  const GumbelNoise noise = sample_gumbel(params.scores.size(), seed);
  return sort_permutation(ScoreVector(perturbed_log_scores(params, noise)));
}

UnimodalMatrix pl_sample_relaxed(const PLParams& params, Temperature tau, std::uint64_t seed) {
  const GumbelNoise noise = sample_gumbel(params.scores.size(), seed);
  return UnimodalMatrix{relaxed_sort_matrix(perturbed_log_scores(params, noise), tau.value),
                        tau.value};
}

EstimatorReport reinforce_gradient(const PLParams& params,
                                   const std::function<double(const Permutation&)>& f,
                                   std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("reinforce_gradient: need n_samples >= 1");
  const std::size_t n = params.scores.size();
  EstimatorReport report;
  report.n_samples = n_samples;
  report.estimate.assign(n, 0.0);
  report.per_sample.reserve(n_samples);
  report.objective_values.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const Permutation z = pl_sample_hard(params, mix_seed(seed, k));
    const double value = f(z);
    std::vector<double> grad = pl_grad_log_pmf(params, z);
    for (double& gi : grad) gi *= value;
    for (std::size_t i = 0; i < n; ++i) report.estimate[i] += grad[i];
    report.per_sample.push_back(std::move(grad));
    report.objective_values.push_back(value);
  }
  for (double& e : report.estimate) e /= static_cast<double>(n_samples);
  return report;
}

namespace {

EstimatorReport relaxed_estimator(const PLParams& params, const RelaxedObjective& f,
                                  Temperature tau, std::size_t n_samples, std::uint64_t seed,
                                  bool straight_through_forward) {
  if (n_samples < 1) throw std::invalid_argument("gradient estimator: need n_samples >= 1");
  const std::size_t n = params.scores.size();
  EstimatorReport report;
  report.n_samples = n_samples;
  report.estimate.assign(n, 0.0);
  report.per_sample.reserve(n_samples);
  report.objective_values.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const GumbelNoise noise = sample_gumbel(n, mix_seed(seed, k));
    ad::Tape tape;
    ad::Var s = tape.input(Matrix::column(params.scores.values()));
    ad::Var perturbed = ad::add(ad::scale(ad::log(s), params.beta),
                                tape.constant(params.beta * Matrix::column(noise.g)));
    ad::Var relaxed = ad::relaxed_sort(tape, perturbed, tau.value);
    ad::Var arg = relaxed;
    if (straight_through_forward)
      arg = ad::straight_through(relaxed, permutation_to_matrix(project_hard(relaxed.value())));
    ad::Var root = f(tape, arg);
    if (root.value().size() != 1)
      throw std::invalid_argument("gradient estimator: objective must be scalar");
    tape.backward(root);
    std::vector<double> grad = s.adjoint().data();
    for (std::size_t i = 0; i < n; ++i) report.estimate[i] += grad[i];
    report.per_sample.push_back(std::move(grad));
    report.objective_values.push_back(root.value()[0]);
  }
  for (double& e : report.estimate) e /= static_cast<double>(n_samples);
  return report;
}

}  // namespace

EstimatorReport reparam_gradient(const PLParams& params, const RelaxedObjective& f,
                                 Temperature tau, std::size_t n_samples, std::uint64_t seed) {
  return relaxed_estimator(params, f, tau, n_samples, seed, false);
}

EstimatorReport straight_through_gradient(const PLParams& params, const RelaxedObjective& f,
                                          Temperature tau, std::size_t n_samples,
                                          std::uint64_t seed) {
  return relaxed_estimator(params, f, tau, n_samples, seed, true);
}

}  // namespace unisort
