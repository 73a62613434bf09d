#include "unisort/rng.hpp"

#include <cmath>

namespace unisort {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix_seed(seed, index));
}

double Rng::gaussian() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), u1 < 1
  return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

double Rng::gumbel(double eps) {
  const double u = uniform01();
  return -std::log(-std::log(u + eps) + eps);
}

}  // namespace unisort
