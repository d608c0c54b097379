#include "paudit/rng.hpp"

#include <cmath>
#include <numbers>

namespace paudit {

std::uint64_t hash64(std::string_view data) {
  return hash64_combine(0xcbf29ce484222325ULL, data);
}

std::uint64_t hash64_combine(std::uint64_t seed, std::string_view data) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash64_combine(std::uint64_t seed, std::uint64_t value) {
  // splitmix64 finalizer. Byte-wise FNV is too linear here: for seeds and
  // values that fit in one byte it reduces to (seed ^ value) * prime^8, so
  // nearby (seed, value) pairs collide exactly.
  auto mix = [](std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(mix(seed + 0x9e3779b97f4a7c15ULL) + value);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % n;
}

double Rng::normal(double mean, double sd) {
  double u1 = uniform01();
  double u2 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double z =
      std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + sd * z;
}

}  // namespace paudit
