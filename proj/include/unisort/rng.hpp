#pragma once

#include <cstdint>
#include <random>

namespace unisort {

// Seedable RNG with a standard-specified engine (mt19937_64) and hand-rolled
// value transforms, so the emitted sequence is identical on every platform.
// std::uniform_real_distribution and friends are implementation-defined and
// deliberately avoided.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Decorrelated substream for sample k of a run seeded with `seed`; results
  // do not depend on how samples are scheduled across threads.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Inclusive bounds. Modulo bias is negligible for the small ranges used here.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // Standard normal via Box-Muller; consumes two uniforms per call.
  double gaussian();

  // Standard Gumbel via -log(-log(U + eps) + eps).
  double gumbel(double eps = 1e-10);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to derive substream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace unisort
