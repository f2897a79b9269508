// Exact time arithmetic and identifiers shared by every module.
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pulsesync {

/// Exact rational number. Every time, rate, delay and protocol constant in
/// the library is one of these; nothing is ever rounded.
using Rational = mpq_class;

/// Real (simulation) time, in abstract units.
using TimePoint = Rational;

/// Reading of a node's hardware clock.
using LocalTime = Rational;

using NodeId = std::uint32_t;
using NodeSet = std::set<NodeId>;

/// An execution left the model (forged signature, delay outside its band,
/// more than f bottoms at an honest node, ...). Always a bug in the
/// configuration or in an adversary strategy, never a protocol outcome.
class ModelViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "num/den", an integer, or a finite decimal ("1.01").
/// Throws std::invalid_argument on malformed text or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "num/den" text; the denominator is always written.
std::string format_rational(const Rational& q);

Rational make_rational(long num, long den = 1);

/// Smallest integer >= q.
mpz_class ceil(const Rational& q);

/// Smallest integer <= q.
mpz_class floor(const Rational& q);

Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);

/// Decimal rendering with `digits` fractional digits (rounded toward zero);
/// for human-readable tables only.
std::string to_decimal(const Rational& q, int digits = 6);

}  // namespace pulsesync
