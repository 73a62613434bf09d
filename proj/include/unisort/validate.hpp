#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "unisort/matrix.hpp"

namespace unisort {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;  // counterexample input on failure, summary on success
};

// The relaxation under test; injectable so a deliberately broken
// implementation can demonstrate that the fuzz catches it.
using RelaxFn = std::function<Matrix(const std::vector<double>&, double)>;

RelaxFn default_relaxation();

// Random (s, tau) with n in [1,16], tau log-uniform in [1e-3, 1e3]: output
// must be non-negative, row sums within 1e-9 of one, tie-protocol argmaxes a
// valid permutation, and the hard projection must equal the exact sort when
// entries are distinct.
PropertyResult check_unimodality_fuzz(int trials, std::uint64_t seed,
                                      const RelaxFn& relax = default_relaxation());

// Distinct well-separated scores at tau = 1e-3: max abs deviation from the
// exact permutation matrix below 1e-6.
PropertyResult check_limit_convergence(int trials, std::uint64_t seed,
                                       const RelaxFn& relax = default_relaxation());

// top_k_sum and kth_largest_index against sort-based oracles, n <= 8.
PropertyResult check_sort_identities(int trials, std::uint64_t seed);

// sum_z exp(log pmf) within 1e-10 of one for n <= 6.
PropertyResult check_pmf_normalization(std::uint64_t seed);

// Backward gradients of the cross-entropy of the relaxed sort against
// central finite differences.
PropertyResult check_gradient_checks(int trials, std::uint64_t seed);

// project_hard of the relaxed sampler equals the hard sampler per seed.
PropertyResult check_coupling(int trials, std::uint64_t seed);

// Everything above at acceptance-scale trial counts.
std::vector<PropertyResult> run_validation_suite(std::uint64_t seed);

}  // namespace unisort
