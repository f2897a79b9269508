// Protocol constants and their validation.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pulsesync/core.hpp"

namespace pulsesync {

/// All constants of one experiment.
///
/// n, f: node count and fault budget. d: maximum delay. u: delay uncertainty
/// on honest links, u_tilde: on links with a faulty endpoint. theta: maximum
/// hardware clock rate. S: skew bound. T: nominal round length. delta: bound
/// on the offset-estimate error, always 2u + (theta^2-1)d + 2(theta^3-theta^2)S.
struct SystemParams {
  std::size_t n = 0;
  std::size_t f = 0;
  Rational d;
  Rational u;
  Rational u_tilde;
  Rational theta;
  Rational S;
  Rational T;
  Rational delta;

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// ceil(n/2) - 1, the largest fault budget signatures allow.
constexpr std::size_t max_fault_budget(std::size_t n) { return n == 0 ? 0 : (n - 1) / 2; }

Rational measurement_error_bound(const Rational& theta, const Rational& d, const Rational& u,
                                 const Rational& S);

/// Right-hand side of the round-length precondition:
/// (theta^2+theta+1)S + (theta+1)d - 2u.
Rational min_round_length(const Rational& theta, const Rational& d, const Rational& u,
                          const Rational& S);

/// Right-hand side of the skew precondition:
/// (2(2theta-1)delta + 2(theta-1)T) / (2-theta).
Rational min_skew_for(const Rational& theta, const Rational& delta, const Rational& T);

struct ParamViolation {
  std::string constraint;
  std::string detail;
};

struct ParamCheck {
  std::optional<SystemParams> accepted;
  std::vector<ParamViolation> violations;

  bool ok() const { return accepted.has_value(); }
  bool names(std::string_view constraint) const;
};

/// Accepts the record iff every invariant holds; otherwise lists each violated
/// constraint. Constraint names: "n >= 3", "f <= ceil(n/2)-1", "d > 0",
/// "u >= 0", "u <= d", "u <= u_tilde", "u_tilde <= d", "theta > 1", "S >= 0",
/// "delta", "corollary4", "lemma8".
ParamCheck validate_params(const SystemParams& raw);

/// validate_params, throwing std::invalid_argument with every violation on failure.
SystemParams require_valid(const SystemParams& raw);

}  // namespace pulsesync
