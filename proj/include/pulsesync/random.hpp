// Seeded, platform-stable randomness. std::uniform_*_distribution is
// implementation-defined, so draws go through our own rejection sampler.
#pragma once

#include <cstdint>
#include <random>

#include "pulsesync/core.hpp"

namespace pulsesync {

class Rng {
 public:
  /// Name recorded in output files next to the seed.
  static constexpr const char* kGenerator = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  bool coin() { return below(2) == 1; }

  /// One of the `steps + 1` evenly spaced rationals lo, lo + (hi-lo)/steps, ..., hi.
  Rational grid(const Rational& lo, const Rational& hi, std::uint64_t steps);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pulsesync
