#include "pulsesync/params.hpp"

#include <algorithm>

namespace pulsesync {

Rational measurement_error_bound(const Rational& theta, const Rational& d, const Rational& u,
                                 const Rational& S) {
  const Rational theta2 = theta * theta;
  const Rational theta3 = theta2 * theta;
  return Rational(2 * u + (theta2 - 1) * d + 2 * (theta3 - theta2) * S);
}

Rational min_round_length(const Rational& theta, const Rational& d, const Rational& u,
                          const Rational& S) {
  return Rational((theta * theta + theta + 1) * S + (theta + 1) * d - 2 * u);
}

Rational min_skew_for(const Rational& theta, const Rational& delta, const Rational& T) {
  return Rational((2 * (2 * theta - 1) * delta + 2 * (theta - 1) * T) / (2 - theta));
}

bool ParamCheck::names(std::string_view constraint) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const ParamViolation& v) { return v.constraint == constraint; });
}

ParamCheck validate_params(const SystemParams& raw) {
  ParamCheck check;
  auto fail = [&](std::string constraint, std::string detail) {
    check.violations.push_back({std::move(constraint), std::move(detail)});
  };

  if (raw.n < 3) fail("n >= 3", "n = " + std::to_string(raw.n));
  if (raw.f > max_fault_budget(raw.n)) {
    fail("f <= ceil(n/2)-1", "f = " + std::to_string(raw.f) + " exceeds " +
                                 std::to_string(max_fault_budget(raw.n)));
  }
  if (raw.d <= 0) fail("d > 0", "d = " + format_rational(raw.d));
  if (raw.u < 0) fail("u >= 0", "u = " + format_rational(raw.u));
  if (raw.u > raw.d) fail("u <= d", "u = " + format_rational(raw.u) + ", d = " + format_rational(raw.d));
  if (raw.u > raw.u_tilde) {
    fail("u <= u_tilde", "u = " + format_rational(raw.u) + ", u_tilde = " + format_rational(raw.u_tilde));
  }
  if (raw.u_tilde > raw.d) {
    fail("u_tilde <= d", "u_tilde = " + format_rational(raw.u_tilde) + ", d = " + format_rational(raw.d));
  }
  const bool theta_ok = raw.theta > 1;
  if (!theta_ok) fail("theta > 1", "theta = " + format_rational(raw.theta));
  if (raw.S < 0) fail("S >= 0", "S = " + format_rational(raw.S));

  const Rational delta = measurement_error_bound(raw.theta, raw.d, raw.u, raw.S);
  if (raw.delta != delta) {
    fail("delta", "delta = " + format_rational(raw.delta) + ", formula gives " + format_rational(delta));
  }

  const Rational t_min = min_round_length(raw.theta, raw.d, raw.u, raw.S);
  if (raw.T < t_min) {
    fail("corollary4", "T = " + format_rational(raw.T) + " < (theta^2+theta+1)S+(theta+1)d-2u = " +
                           format_rational(t_min));
  }

  // 2 - theta <= 0 makes the skew precondition unsatisfiable.
  if (theta_ok) {
    if (raw.theta >= 2) {
      fail("lemma8", "theta >= 2 leaves no admissible skew");
    } else {
      const Rational s_min = min_skew_for(raw.theta, delta, raw.T);
      if (raw.S < s_min) {
        fail("lemma8", "S = " + format_rational(raw.S) + " < (2(2theta-1)delta+2(theta-1)T)/(2-theta) = " +
                           format_rational(s_min));
      }
    }
  }

  if (check.violations.empty()) check.accepted = raw;
  return check;
}

SystemParams require_valid(const SystemParams& raw) {
  ParamCheck check = validate_params(raw);
  if (check.ok()) return *check.accepted;
  std::string message = "invalid parameters:";
  for (const auto& v : check.violations) message += " [" + v.constraint + ": " + v.detail + "]";
  throw std::invalid_argument(message);
}

}  // namespace pulsesync
