// Crusader pulse synchronization: the per-node pulse loop on top of TCB.
#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "pulsesync/des.hpp"
#include "pulsesync/sync_engine.hpp"
#include "pulsesync/tcb.hpp"

namespace pulsesync {

/// Offset estimate h - P - d + u - S for one accepted instance.
Rational offset_estimate(const SystemParams& params, const LocalTime& h, const LocalTime& pulse_local);

struct CorrectionResult {
  Rational delta;
  std::size_t bottoms = 0;
  /// Spanned interval of the retained estimates; empty only in tolerant mode.
  std::optional<Interval> retained;
};

/// Sort the non-bottom estimates by (value, dealer), drop f - b from each end
/// and take the midpoint. Strict: b > f or an empty remainder throws
/// ModelViolation. Tolerant: drops max(f - b, 0) and yields 0 when nothing is left.
CorrectionResult cps_compute_correction(std::span<const std::optional<Rational>> estimates, std::size_t f,
                                        bool strict = true);

struct CpsOptions {
  /// Strict mode treats b > f and a wakeup in the past as model violations.
  /// Tolerant mode clamps them and leaves an "anomaly" note instead; only
  /// useful when running the protocol outside its assumptions.
  bool strict = true;
};

/// Per-node state of the pulse loop. Trace notes emitted:
///   "tcb_output"  round, subject = dealer, value = h or bottom
///   "correction"  round, value = Delta, estimates, count = b
///   "anomaly"     tolerant mode only
class CpsNode final : public NodeBehavior {
 public:
  CpsNode(const SystemParams& params, CpsOptions options = {});

  void start(NodeContext& ctx) override;
  void on_message(NodeContext& ctx, NodeId from, const Message& msg) override;
  void on_timer(NodeContext& ctx, std::uint64_t tag) override;

  std::uint64_t round() const { return round_; }
  const std::optional<LocalTime>& pulse_local() const { return pulse_local_; }
  const std::vector<TcbInstance>& instances() const { return instances_; }
  const std::optional<Rational>& last_correction() const { return correction_; }

 private:
  enum class Timer : std::uint64_t { kPulse = 1, kDealerSend = 2, kFinalize = 3, kDeadline = 4 };
  static std::uint64_t tag(Timer kind, std::uint64_t round, NodeId dealer = 0);

  void emit_pulse(NodeContext& ctx);
  void finalize(NodeContext& ctx, TcbInstance& inst);
  void maybe_complete(NodeContext& ctx);
  void schedule_next(NodeContext& ctx, const LocalTime& at);

  SystemParams params_;
  CpsOptions options_;
  std::uint64_t round_ = 0;
  bool round_open_ = false;
  std::optional<LocalTime> pulse_local_;
  std::vector<TcbInstance> instances_;
  std::optional<Rational> correction_;
};

BehaviorFactory make_cps_factory(const SystemParams& params, CpsOptions options = {});

}  // namespace pulsesync
