#include "unisort/validate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "unisort/autodiff.hpp"
#include "unisort/losses.hpp"
#include "unisort/pl.hpp"
#include "unisort/relaxation.hpp"
#include "unisort/rng.hpp"

namespace unisort {

namespace {

std::string describe_scores(const std::vector<double>& s, double tau) {
  std::ostringstream os;
  os << "tau=" << tau << " s=[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

// Distinct scores with a guaranteed separation: a random subset of a grid
// with step 0.1, so row logit gaps are bounded away from zero.
std::vector<double> grid_scores(int n, Rng& rng) {
  std::vector<int> levels(128);
  std::iota(levels.begin(), levels.end(), -64);
  for (std::size_t i = levels.size(); i > 1; --i)
    std::swap(levels[i - 1], levels[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = 0.1 * levels[static_cast<std::size_t>(i)];
  return s;
}

bool has_duplicates(const std::vector<double>& s) {
  std::vector<double> sorted = s;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

}  // namespace

RelaxFn default_relaxation() {
  return [](const std::vector<double>& s, double tau) { return relaxed_sort_matrix(s, tau); };
}

PropertyResult check_unimodality_fuzz(int trials, std::uint64_t seed, const RelaxFn& relax) {
  PropertyResult result{"unimodality-fuzz", true, ""};
  Rng rng = Rng::stream(seed, 11);
  for (int t = 0; t < trials; ++t) {
    const int n = rng.uniform_int(1, 16);
    const double tau = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
    std::vector<double> s(static_cast<std::size_t>(n));
    for (double& v : s) v = rng.uniform(-10.0, 10.0);
    if (t % 10 == 3 && n >= 2) s[0] = s[static_cast<std::size_t>(n - 1)];  // exercise ties

    const Matrix p = relax(s, tau);
    std::string why;
    if (p.rows() != static_cast<std::size_t>(n) || p.cols() != static_cast<std::size_t>(n)) {
      why = "wrong shape";
    } else {
      for (std::size_t i = 0; i < p.size() && why.empty(); ++i)
        if (!(p[i] >= 0.0)) why = "negative entry";
      for (std::size_t i = 0; i < p.rows() && why.empty(); ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) rs += p(i, j);
        if (std::abs(rs - 1.0) > 1e-9) why = "row sum off by " + std::to_string(rs - 1.0);
      }
      if (why.empty()) {
        const std::vector<int> arg = tie_break_argmaxes(p);
        std::vector<bool> seen(static_cast<std::size_t>(n + 1), false);
        for (int v : arg) {
          if (v < 1 || v > n || seen[static_cast<std::size_t>(v)]) why = "argmaxes not a permutation";
          else seen[static_cast<std::size_t>(v)] = true;
        }
        if (why.empty() && !has_duplicates(s)) {
          const Permutation expect = sort_permutation(ScoreVector(s));
          if (arg != expect.indices()) why = "projection differs from exact sort";
        }
      }
    }
    if (!why.empty()) {
      result.passed = false;
      result.detail = why + " at " + describe_scores(s, tau);
      return result;
    }
  }
  result.detail = std::to_string(trials) + " trials";
  return result;
}

PropertyResult check_limit_convergence(int trials, std::uint64_t seed, const RelaxFn& relax) {
  PropertyResult result{"limit-convergence", true, ""};
  Rng rng = Rng::stream(seed, 12);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int n = rng.uniform_int(1, 16);
    const std::vector<double> s = grid_scores(n, rng);
    const Matrix relaxed = relax(s, 1e-3);
    const Matrix hard = permutation_to_matrix(sort_permutation(ScoreVector(s)));
    const double dev = max_abs_diff(relaxed, hard);
    worst = std::max(worst, dev);
    if (dev >= 1e-6) {
      result.passed = false;
      result.detail = "deviation " + std::to_string(dev) + " at " + describe_scores(s, 1e-3);
      return result;
    }
  }
  result.detail = "max deviation " + std::to_string(worst);
  return result;
}

PropertyResult check_sort_identities(int trials, std::uint64_t seed) {
  PropertyResult result{"sort-identities", true, ""};
  Rng rng = Rng::stream(seed, 13);
  for (int t = 0; t < trials; ++t) {
    const int n = rng.uniform_int(1, 8);
    const std::vector<double> s = grid_scores(n, rng);
    const ScoreVector sv(s);
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    const Permutation expect = sort_permutation(sv);
    double running = 0.0;
    for (int k = 1; k <= n; ++k) {
      running += sorted[static_cast<std::size_t>(k - 1)];
      if (std::abs(top_k_sum(sv, k) - running) > 1e-12) {
        result.passed = false;
        result.detail = "top_k_sum k=" + std::to_string(k) + " at " + describe_scores(s, 0.0);
        return result;
      }
      if (kth_largest_index(sv, k) != expect.indices()[static_cast<std::size_t>(k - 1)]) {
        result.passed = false;
        result.detail = "kth_largest_index k=" + std::to_string(k) + " at " + describe_scores(s, 0.0);
        return result;
      }
    }
  }
  result.detail = std::to_string(trials) + " trials, all k";
  return result;
}

PropertyResult check_pmf_normalization(std::uint64_t seed) {
  PropertyResult result{"pmf-normalization", true, ""};
  Rng rng = Rng::stream(seed, 14);
  double worst = 0.0;
  for (int n = 1; n <= 6; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> s(static_cast<std::size_t>(n));
      for (double& v : s) v = rng.uniform(0.1, 10.0);
      const PLParams params{ScoreVector(s)};
      const double total = enumerate_expectation(params, [](const Permutation&) { return 1.0; });
      worst = std::max(worst, std::abs(total - 1.0));
      if (std::abs(total - 1.0) > 1e-10) {
        result.passed = false;
        result.detail = "sum " + std::to_string(total) + " at " + describe_scores(s, 0.0);
        return result;
      }
    }
  }
  result.detail = "max |sum-1| " + std::to_string(worst);
  return result;
}

PropertyResult check_gradient_checks(int trials, std::uint64_t seed) {
  PropertyResult result{"gradient-checks", true, ""};
  Rng rng = Rng::stream(seed, 15);
  for (int t = 0; t < trials; ++t) {
    const int n = rng.uniform_int(2, 6);
    const std::vector<double> s = grid_scores(n, rng);
    const double tau = std::vector<double>{0.5, 1.0, 4.0}[static_cast<std::size_t>(t % 3)];
    const Matrix p_true = permutation_to_matrix(sort_permutation(ScoreVector(grid_scores(n, rng))));

    const auto objective = [&](const std::vector<double>& x) {
      return cross_entropy_rows(p_true, relaxed_sort_matrix(x, tau));
    };
    ad::Tape tape;
    ad::Var sv = tape.input(Matrix::column(s));
    ad::Var loss = cross_entropy_rows(tape, p_true, ad::relaxed_sort(tape, sv, tau));
    tape.backward(loss);
    const std::vector<double> fd = ad::finite_diff_gradient(objective, s);
    for (int i = 0; i < n; ++i) {
      const double a = sv.adjoint()[static_cast<std::size_t>(i)];
      const double f = fd[static_cast<std::size_t>(i)];
      if (std::abs(a - f) / std::max(std::abs(f), 1e-4) > 1e-4) {
        result.passed = false;
        result.detail = "grad mismatch coord " + std::to_string(i) + " at " + describe_scores(s, tau);
        return result;
      }
    }
  }
  result.detail = std::to_string(trials) + " instances";
  return result;
}

PropertyResult check_coupling(int trials, std::uint64_t seed) {
  PropertyResult result{"sampler-coupling", true, ""};
  Rng rng = Rng::stream(seed, 16);
  for (int t = 0; t < trials; ++t) {
    const int n = rng.uniform_int(1, 8);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (double& v : s) v = rng.uniform(0.1, 10.0);
    const PLParams params{ScoreVector(s)};
    const double tau = std::exp(rng.uniform(std::log(1e-2), std::log(1e2)));
    const std::uint64_t draw_seed = rng.next_u64();
    const Permutation hard = pl_sample_hard(params, draw_seed);
    const Permutation projected =
        project_hard(pl_sample_relaxed(params, Temperature(tau), draw_seed));
    if (!(hard == projected)) {
      result.passed = false;
      result.detail = "coupling broken at " + describe_scores(s, tau) + " seed=" +
                      std::to_string(draw_seed);
      return result;
    }
  }
  result.detail = std::to_string(trials) + " draws";
  return result;
}

std::vector<PropertyResult> run_validation_suite(std::uint64_t seed) {
  std::vector<PropertyResult> results;
  results.push_back(check_unimodality_fuzz(10000, seed));
  results.push_back(check_limit_convergence(1000, seed));
  results.push_back(check_sort_identities(1000, seed));
  results.push_back(check_pmf_normalization(seed));
  results.push_back(check_gradient_checks(100, seed));
  results.push_back(check_coupling(500, seed));
  return results;
}

}  // namespace unisort
