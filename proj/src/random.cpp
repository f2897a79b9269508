#include "pulsesync/random.hpp"

#include <limits>
#include <stdexcept>

namespace pulsesync {

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below(0)");
  // Largest multiple of bound that fits; draws above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("Rng::between: empty range");
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) return static_cast<std::int64_t>(engine_());
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span + 1));
}

Rational Rng::grid(const Rational& lo, const Rational& hi, std::uint64_t steps) {
  if (steps == 0) return lo;
  const std::uint64_t k = below(steps + 1);
  Rational q = lo + (hi - lo) * Rational(mpz_class(std::to_string(k)), mpz_class(std::to_string(steps)));
  q.canonicalize();
  return q;
}

}  // namespace pulsesync
