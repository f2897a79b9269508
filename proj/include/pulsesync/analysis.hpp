// Parameter solver and exact trace checkers for the pulse protocol.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulsesync/des.hpp"
#include "pulsesync/params.hpp"

namespace pulsesync {

/// 4 - theta + theta^2 - 3 theta^3; positive exactly on the feasible drift range.
Rational feasibility_polynomial(const Rational& theta);

struct ParameterSolution {
  Rational d, u, u_tilde, theta;

  Rational polynomial;
  /// polynomial > 0.
  bool feasible = false;
  /// Coefficient of S once delta(S) is expanded in the skew precondition:
  /// 2 - theta - 4(2theta-1)theta^2(theta-1).
  Rational skew_coefficient;
  /// skew_coefficient - 2(theta^3 - 1); the round-length and skew
  /// preconditions hold together for some T iff this is positive.
  Rational joint_coefficient;
  /// Both preconditions are satisfiable together.
  bool consistent = false;

  /// T from the closed form (4 - theta + theta^2 - 3theta^3 denominator).
  Rational T_closed_form;
  /// Smallest T for which minimal S still meets the round-length precondition.
  Rational T_joint;
  Rational T;
  Rational S;
  Rational delta;
  /// Lower bound on the minimum period, (T - (theta+1)S)/theta.
  Rational P_min;
  /// Upper bound on the maximum period, T + 3S.
  Rational P_max;
  /// S by the two closed forms found in the literature, for comparison only.
  Rational S_statement;
  Rational S_proof;
  std::vector<std::string> binding;

  bool usable() const { return feasible && consistent; }
  SystemParams params(std::size_t n, std::size_t f) const;
};

/// Picks the smallest T satisfying both the closed-form bound and the joint
/// constraint (scaled by t_scale >= 1), then the minimal S of the skew
/// precondition for that T. Throws std::invalid_argument unless d > 0,
/// 0 <= u <= u_tilde <= d and theta > 1. `u_tilde` defaults to u.
ParameterSolution solve_parameters(const Rational& d, const Rational& u, const Rational& theta,
                                   std::optional<Rational> u_tilde = std::nullopt,
                                   const Rational& t_scale = Rational(1));

nlohmann::ordered_json to_json(const ParameterSolution& s);

struct Witness {
  std::uint64_t round = 0;
  std::vector<NodeId> nodes;
  std::vector<Rational> times;
  std::string detail;
};

struct CheckResult {
  std::string name;
  bool passed = true;
  std::size_t evaluated = 0;
  /// Smallest slack seen (bound minus measured, or measured minus bound).
  std::optional<Rational> margin;
  std::vector<Witness> witnesses;

  void observe(const Rational& slack, bool strict, Witness w);
};

struct ConformanceReport {
  std::vector<CheckResult> checks;
  std::optional<Rational> max_skew;
  std::optional<Rational> min_period;
  std::optional<Rational> max_period;

  bool passed() const;
  const CheckResult* find(const std::string& name) const;
  ConformanceReport& merge(const ConformanceReport& other);
};

nlohmann::ordered_json to_json(const ConformanceReport& r);

/// Liveness for pulses 1..R, skew <= S, minimum period >= P_min and maximum
/// period <= P_max over consecutive pulses, all exact.
ConformanceReport check_pulse_sync(const ExecutionTrace& trace, const Rational& S, const Rational& P_min,
                                   const Rational& P_max, std::uint64_t R);

/// Checks the per-round protocol invariants on every complete round (1..R,
/// default: every round with a correction at all honest nodes): lemma3
/// (honest dealers accepted), lemma4 (reception spread), lemma5 (honest
/// estimates), lemma6 (cross-node consistency), lemma7 (correction bounds and
/// contraction), corollary4 (next pulse not in the past), lemma8 (skew kept
/// and round advance bounds).
ConformanceReport check_lemma_suite(const ExecutionTrace& trace, const SystemParams& params,
                                    std::optional<std::uint64_t> R = std::nullopt);

}  // namespace pulsesync
