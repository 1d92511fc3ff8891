// Seeded RNG used by every randomized stage. Uniform draws are built from
// raw engine bits so streams do not depend on libstdc++ distribution details.
#pragma once

#include <cstdint>
#include <random>

namespace snipforge {

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // in [0, 1)
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // in [0, n); n > 0
  size_t bounded(size_t n) { return static_cast<size_t>(engine_() % n); }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace snipforge
