#include "pulsesync/tcb.hpp"

namespace pulsesync {

std::string tcb_payload(std::uint64_t round) { return encode_payload("tcb", round, "pulse"); }

Message tcb_message(std::uint64_t round, NodeId dealer, const SignatureToken& token) {
  return Message{kTcbKind, round, dealer, {token}, ""};
}

TcbInstance::TcbInstance(const SystemParams& params, std::uint64_t round, NodeId dealer, NodeId owner,
                         const LocalTime& pulse_local)
    : params_(params), round_(round), dealer_(dealer), owner_(owner), pulse_(pulse_local),
      payload_(tcb_payload(round)) {}

LocalTime TcbInstance::dealer_send_time() const { return LocalTime(pulse_ + params_.theta * params_.S); }

LocalTime TcbInstance::window_end() const {
  return LocalTime(pulse_ + params_.theta * (params_.d + (params_.theta + 1) * params_.S));
}

LocalTime TcbInstance::deadline() const { return LocalTime(window_end() + params_.d - 2 * params_.u); }

std::optional<LocalTime> TcbInstance::quiet_end() const {
  if (!h_) return std::nullopt;
  return max(*h_, LocalTime(*h_ + params_.d - 2 * params_.u));
}

TcbInstance::Reaction TcbInstance::on_token(NodeId from, const SignatureToken& token, const LocalTime& at) {
  Reaction r;
  if (done() || !verify(dealer_, token, payload_)) return r;
  if (from == dealer_) {
    if (phase_ == TcbPhase::kAwaitingDealer && pulse_ < at && at < window_end()) {
      h_ = at;
      phase_ = TcbPhase::kEchoed;
      r.echo = owner_ != dealer_;
      r.finalize_at = quiet_end();
    }
    return r;
  }
  // Third party: only the earliest reception after the pulse matters.
  if (at > pulse_ && (!third_party_ || at < *third_party_)) third_party_ = at;
  return r;
}

bool TcbInstance::finalize(const LocalTime& now) {
  if (done()) return true;
  if (h_) {
    if (now < *quiet_end()) return false;
    const LocalTime quiet(*h_ + params_.d - 2 * params_.u);
    const bool conflict = third_party_ && *third_party_ < quiet;
    if (!conflict) output_ = h_;
  } else if (now < deadline()) {
    return false;
  }
  phase_ = TcbPhase::kDone;
  return true;
}

}  // namespace pulsesync
