#include "fairprobe/random.hpp"

#include <cmath>
#include <limits>

namespace fairprobe {

std::size_t Rng::uniform_index(std::size_t n) {
  // rejection sampling on the top of the range removes modulo bias
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = next();
  while (x >= limit) {
    x = next();
  }
  return static_cast<std::size_t>(x % bound);
}

double Rng::normal() {
  // Box-Muller; one value per call keeps the stream stateless
  double u1 = uniform01();
  while (u1 <= 0.0) {
    u1 = uniform01();
  }
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (auto t : tags) {
    h = splitmix64(h ^ splitmix64(t));
  }
  return h;
}

} // namespace fairprobe
