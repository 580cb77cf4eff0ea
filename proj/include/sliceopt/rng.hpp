// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace sliceopt {

// splitmix64 finalizer. Used to derive independent sub-seeds, e.g. restart r
// of an annealing run is seeded by a pure function of (seed, r).
inline constexpr uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr uint64_t sub_seed(uint64_t seed, uint64_t stream) {
  return mix64(seed ^ mix64(stream + 1));
}

// mt19937_64 with explicit uniform mappings. The standard <random>
// distributions are implementation-defined, so everything seeded goes through
// these to keep results reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // [0, n)
  uint64_t uniform_int(uint64_t n) { return n ? engine_() % n : 0; }

  bool coin() { return (engine_() & 1u) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sliceopt
