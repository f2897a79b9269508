// Three-execution shifting attack at n = 3.
//
// Execution a corrupts node a. Node a+1 runs on the identity clock, node a+2
// on a clock that runs at rate theta until it leads by 2*u_tilde/3 and at rate
// 1 afterwards. Honest links take exactly d, links touching the faulty node
// exactly d - u_tilde. Whenever honest x sends to honest y in one execution,
// the faulty x of the execution that corrupts x replays the message so that y
// receives it at the same local time. Every honest node then sees the same
// local view in both executions it is honest in.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulsesync/des.hpp"
#include "pulsesync/params.hpp"

namespace pulsesync {

/// Pulses at local S + (k-1)T, k = 1, 2, ...; never sends.
class FreeRunning final : public NodeBehavior {
 public:
  FreeRunning(Rational S, Rational T) : S_(std::move(S)), T_(std::move(T)) {}
  void start(NodeContext& ctx) override;
  void on_message(NodeContext&, NodeId, const Message&) override {}
  void on_timer(NodeContext& ctx, std::uint64_t tag) override;

 private:
  Rational S_, T_;
};

/// Does nothing at all.
class Inert final : public NodeBehavior {
 public:
  void start(NodeContext&) override {}
  void on_message(NodeContext&, NodeId, const Message&) override {}
  void on_timer(NodeContext&, std::uint64_t) override {}
};

BehaviorFactory make_free_running_factory(const Rational& S, const Rational& T);
BehaviorFactory make_inert_factory();

/// "cps" (tolerant CPS), "free_running" or "inert"; std::invalid_argument otherwise.
BehaviorFactory make_attack_behavior(const std::string& name, const SystemParams& params);

/// 2 u_tilde / (3 (theta - 1)): where the fast clock switches to rate 1.
Rational clock_breakpoint(const Rational& theta, const Rational& u_tilde);

/// ceil(u_tilde / (P_min (theta - 1))) + 1.
std::uint64_t attack_round(const Rational& u_tilde, const Rational& P_min, const Rational& theta);

/// Clocks of execution `a`, indexed by node.
std::vector<ClockSchedule> attack_clocks(const SystemParams& params, NodeId a);

/// Thrown when the construction cannot produce an indistinguishable triple.
class AttackAborted : public ModelViolation {
 public:
  AttackAborted(const std::string& what, std::size_t ties) : ModelViolation(what), receive_ties(ties) {}
  /// Same-local-time receives seen in the failed attempt.
  std::size_t receive_ties;
};

/// One message the faulty node injects.
struct Injection {
  std::size_t execution = 0;
  NodeId from = 0;
  NodeId to = 0;
  Message msg;
  TimePoint send_time;
  TimePoint arrival;
  /// Receiver's local reception time (equal in both executions).
  LocalTime local_arrival;
};

struct ExecutionTriple {
  SystemParams params;
  /// u_tilde asked for; params.u_tilde is what was run (differs after a nudge).
  Rational requested_u_tilde;
  std::size_t retries = 0;
  TimePoint horizon;
  /// executions[a] corrupts node a.
  std::array<ExecutionTrace, 3> executions;
  std::vector<Injection> injections;
  /// Injections actually sent before the horizon.
  std::size_t faulty_messages = 0;
  /// Per node i: local time up to which Ex^{i+1} and Ex^{i+2} were compared.
  std::array<LocalTime, 3> view_horizon;
  std::array<bool, 3> views_equal{};
  /// Receives sharing (node, local time) inside one execution.
  std::size_t receive_ties = 0;
  /// Failed audits (delays, clocks, availability), one line each.
  std::vector<std::string> audit_failures;

  bool indistinguishable() const { return views_equal[0] && views_equal[1] && views_equal[2]; }
  bool audits_ok() const { return audit_failures.empty(); }
};

/// One attempt. Throws AttackAborted if some node tells its two executions
/// apart, and ModelViolation if a replay would need a signature the faulty
/// node has not seen. Requires d > 2 u_tilde / 3 and u_tilde < d.
ExecutionTriple build_execution_triple(const BehaviorFactory& behavior, const SystemParams& params,
                                       const TimePoint& horizon);

/// Retries with u_tilde nudged up by u_tilde/997, u_tilde/997^2, ... when an
/// attempt aborts and same-local-time receives were present.
ExecutionTriple build_execution_triple_with_retry(const BehaviorFactory& behavior, const SystemParams& params,
                                                  const TimePoint& horizon, std::size_t max_retries = 3);

/// Horizon long enough for `pulses` rounds of a protocol with period at most T + 3S.
TimePoint attack_horizon(const SystemParams& params, std::uint64_t pulses);

struct LowerBoundReport {
  std::uint64_t round = 0;
  Rational breakpoint;
  /// pulses[a][v]: pulse `round` of honest v in execution a.
  std::array<std::array<std::optional<TimePoint>, 3>, 3> pulses;
  /// skews[a] = p_{a+1} - p_{a+2} in execution a (signed).
  std::array<Rational, 3> skews;
  Rational sum;
  bool sum_identity_ok = false;
  /// p_i^{i+1} = p_i^{i+2} - 2 u_tilde/3 for every i.
  bool shift_identity_ok = false;
  /// Every pulse of the round lies at or after the breakpoint.
  bool after_breakpoint = false;
  Rational max_skew;
  bool bound_ok = false;
  bool indistinguishability_ok = false;
  bool audits_ok = false;

  bool passed() const { return sum_identity_ok && bound_ok && indistinguishability_ok && audits_ok; }
};

/// Throws std::runtime_error ("horizon too short") if an honest node never
/// emitted pulse `round` in some execution.
LowerBoundReport verify_lower_bound(const ExecutionTriple& triple, std::uint64_t round);

nlohmann::ordered_json to_json(const LowerBoundReport& report, const ExecutionTriple& triple);

}  // namespace pulsesync
