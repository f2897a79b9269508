#include "pulsesync/clock.hpp"

#include <algorithm>
#include <stdexcept>

namespace pulsesync {

ClockSchedule::ClockSchedule(std::vector<ClockSegment> segments, Rational initial_offset)
    : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("clock schedule needs at least one segment");
  if (segments_.front().start != 0) throw std::invalid_argument("first clock segment must start at 0");
  if (initial_offset < 0) throw std::invalid_argument("clock offset H(0) must be >= 0");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].rate < 1) throw std::invalid_argument("clock rate below 1");
    if (i > 0 && segments_[i].start <= segments_[i - 1].start) {
      throw std::invalid_argument("clock segment starts must be strictly increasing");
    }
  }
  local_at_start_.reserve(segments_.size());
  local_at_start_.push_back(initial_offset);
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    const ClockSegment& prev = segments_[i - 1];
    local_at_start_.push_back(local_at_start_.back() + prev.rate * (segments_[i].start - prev.start));
  }
  max_rate_ = std::max_element(segments_.begin(), segments_.end(), [](const auto& a, const auto& b) {
                return a.rate < b.rate;
              })->rate;
}

ClockSchedule ClockSchedule::identity(const Rational& offset) {
  return ClockSchedule({{0, 1}}, offset);
}

ClockSchedule ClockSchedule::constant_rate(const Rational& rate, const Rational& offset) {
  return ClockSchedule({{0, rate}}, offset);
}

ClockSchedule ClockSchedule::fast_then_offset(const Rational& theta, const Rational& lead) {
  if (lead < 0) throw std::invalid_argument("clock lead must be >= 0");
  if (lead == 0) return identity();
  if (theta <= 1) throw std::invalid_argument("fast clock needs theta > 1");
  const Rational breakpoint = lead / (theta - 1);
  return ClockSchedule({{0, theta}, {breakpoint, 1}}, 0);
}

LocalTime ClockSchedule::at(const TimePoint& t) const {
  if (t < 0) throw std::domain_error("clock evaluated at negative time");
  // Last segment whose start is <= t.
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](const TimePoint& x, const ClockSegment& s) { return x < s.start; });
  const auto i = static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
  return local_at_start_[i] + segments_[i].rate * (t - segments_[i].start);
}

TimePoint ClockSchedule::inverse(const LocalTime& h) const {
  if (h < local_at_start_.front()) throw std::domain_error("local time precedes H(0)");
  auto it = std::upper_bound(local_at_start_.begin(), local_at_start_.end(), h);
  const auto i = static_cast<std::size_t>(std::distance(local_at_start_.begin(), it)) - 1;
  return segments_[i].start + (h - local_at_start_[i]) / segments_[i].rate;
}

bool ClockSchedule::rates_within(const Rational& theta) const {
  return std::all_of(segments_.begin(), segments_.end(),
                     [&](const ClockSegment& s) { return s.rate >= 1 && s.rate <= theta; });
}

LocalTime clock_local_time(const ClockSchedule& schedule, const TimePoint& t) { return schedule.at(t); }

TimePoint clock_inverse(const ClockSchedule& schedule, const LocalTime& h) { return schedule.inverse(h); }

}  // namespace pulsesync
