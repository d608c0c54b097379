#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace paudit {

// 64-bit FNV-1a for strings, splitmix64 mixing for integers. Used for cache
// keys, seed derivation, and config fingerprints; stable across platforms.
std::uint64_t hash64(std::string_view data);
std::uint64_t hash64_combine(std::uint64_t seed, std::string_view data);
std::uint64_t hash64_combine(std::uint64_t seed, std::uint64_t value);

// Deterministic random source. All distributions are implemented on top of
// raw mt19937_64 output so that results are bit-identical across standard
// library implementations (std::normal_distribution etc. are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t n);

  // Box-Muller; draws two uniforms per call, no state carried over.
  double normal(double mean, double sd);

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace paudit
