// Piecewise-linear hardware clocks.
#pragma once

#include <vector>

#include "pulsesync/core.hpp"

namespace pulsesync {

struct ClockSegment {
  TimePoint start;
  Rational rate;

  friend bool operator==(const ClockSegment&, const ClockSegment&) = default;
};

/// Hardware clock H: a continuous, strictly increasing, piecewise-linear map
/// from real time to local time. The last segment extends to infinity.
///
/// Invariants (checked at construction): the first segment starts at 0,
/// starts are strictly increasing, every rate is >= 1, and H(0) >= 0.
/// The upper rate bound depends on the system's drift and is checked
/// separately with rates_within().
class ClockSchedule {
 public:
  ClockSchedule(std::vector<ClockSegment> segments, Rational initial_offset);

  /// H(t) = offset + t.
  static ClockSchedule identity(const Rational& offset = 0);
  /// H(t) = offset + rate * t.
  static ClockSchedule constant_rate(const Rational& rate, const Rational& offset = 0);
  /// Runs at rate `theta` until it leads real time by `lead`, then at rate 1:
  /// H(t) = theta * t for t <= lead / (theta - 1), and t + lead afterwards.
  static ClockSchedule fast_then_offset(const Rational& theta, const Rational& lead);

  LocalTime at(const TimePoint& t) const;
  TimePoint inverse(const LocalTime& h) const;

  bool rates_within(const Rational& theta) const;
  const Rational& max_rate() const { return max_rate_; }
  const std::vector<ClockSegment>& segments() const { return segments_; }
  const Rational& initial_offset() const { return local_at_start_.front(); }

  friend bool operator==(const ClockSchedule& a, const ClockSchedule& b) {
    return a.segments_ == b.segments_ && a.local_at_start_ == b.local_at_start_;
  }

 private:
  std::vector<ClockSegment> segments_;
  std::vector<LocalTime> local_at_start_;
  Rational max_rate_;
};

/// H(t); requires t >= 0 (std::domain_error otherwise).
LocalTime clock_local_time(const ClockSchedule& schedule, const TimePoint& t);

/// The unique t with H(t) = h; requires h >= H(0) (std::domain_error otherwise).
TimePoint clock_inverse(const ClockSchedule& schedule, const LocalTime& h);

}  // namespace pulsesync
