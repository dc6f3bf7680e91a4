#pragma once

#include <cstdint>
#include <random>

namespace symq {

// All randomness in the library flows through this generator so that a seed
// reproduces runs on any conforming standard library.
//
// Engine: MT19937-64 (std::mt19937_64, whose output sequence is fixed by the
// C++ standard). Derived draws do not use <random> distributions, whose
// algorithms are implementation-defined:
//   uniform01()   = (x >> 11) * 2^-53                      in [0, 1)
//   index(n)      = x mod n, rejecting x >= floor(2^64 / n) * n
//   uniform(a, b) = a + (b - a) * uniform01()
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = (UINT64_MAX / n) * n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace symq
