// Timed crusader broadcast: one receiver-side instance per (round, dealer).
#pragma once

#include <optional>

#include "pulsesync/des.hpp"
#include "pulsesync/params.hpp"
#include "pulsesync/signatures.hpp"

namespace pulsesync {

/// Payload a dealer signs in round r. The dealer signs nothing else that
/// round, so a faulty dealer can only equivocate about timing.
std::string tcb_payload(std::uint64_t round);

/// Framing shared by the dealer's message and every echo.
Message tcb_message(std::uint64_t round, NodeId dealer, const SignatureToken& token);

inline constexpr const char* kTcbKind = "tcb";

enum class TcbPhase { kAwaitingDealer, kEchoed, kDone };

/// Receiver-side state of one instance at `owner`. Pure: the caller feeds
/// receptions in local-time order and asks for finalization when timers fire.
class TcbInstance {
 public:
  TcbInstance(const SystemParams& params, std::uint64_t round, NodeId dealer, NodeId owner,
              const LocalTime& pulse_local);

  /// P + theta * S, when the dealer sends.
  LocalTime dealer_send_time() const;
  /// P + theta(d + (theta+1)S): acceptance needs P < h < window_end.
  LocalTime window_end() const;
  /// window_end + d - 2u: without acceptance the instance ends with bottom here.
  LocalTime deadline() const;
  /// h + d - 2u once accepted; never earlier than h.
  std::optional<LocalTime> quiet_end() const;

  struct Reaction {
    /// Forward the token to every other node now.
    bool echo = false;
    /// Schedule finalize() at this local time.
    std::optional<LocalTime> finalize_at;
  };

  /// A message carrying `token` from `from` arrived at local time `at`.
  /// Invalid tokens and receptions outside the windows are ignored.
  Reaction on_token(NodeId from, const SignatureToken& token, const LocalTime& at);

  /// Ends the instance if `now` has reached its quiet-window end (accepted)
  /// or its deadline (nothing accepted). Returns true if it is now done.
  bool finalize(const LocalTime& now);

  std::uint64_t round() const { return round_; }
  NodeId dealer() const { return dealer_; }
  NodeId owner() const { return owner_; }
  const LocalTime& pulse_local() const { return pulse_; }
  TcbPhase phase() const { return phase_; }
  const std::optional<LocalTime>& accepted_at() const { return h_; }
  const std::optional<LocalTime>& earliest_third_party() const { return third_party_; }
  /// Meaningful once done; nullopt is bottom.
  const std::optional<LocalTime>& output() const { return output_; }
  bool done() const { return phase_ == TcbPhase::kDone; }

 private:
  SystemParams params_;
  std::uint64_t round_;
  NodeId dealer_;
  NodeId owner_;
  LocalTime pulse_;
  std::string payload_;
  TcbPhase phase_ = TcbPhase::kAwaitingDealer;
  std::optional<LocalTime> h_;
  std::optional<LocalTime> third_party_;
  std::optional<LocalTime> output_;
};

}  // namespace pulsesync
