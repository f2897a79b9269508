#include "pulsesync/sync_adversaries.hpp"

#include <stdexcept>

namespace pulsesync {

namespace {

// A value somewhere in [lo - w, hi + w], w = max(hi - lo, 1), so lies land both
// inside and outside the honest range.
Rational draw_value(Rng& rng, const std::map<NodeId, Rational>& honest) {
  Rational lo(0), hi(1);
  if (!honest.empty()) {
    lo = hi = honest.begin()->second;
    for (const auto& [v, x] : honest) {
      lo = min(lo, x);
      hi = max(hi, x);
    }
  }
  const Rational w = max(Rational(hi - lo), Rational(1));
  return rng.grid(Rational(lo - w), Rational(hi + w), 64);
}

SyncMessage signed_message(NodeId from, NodeId to, NodeId dealer, std::uint64_t iteration, const Rational& value) {
  return SyncMessage{from, to, dealer, value, sign(dealer, cb_payload(iteration, value))};
}

// Corrupted nodes echo every direct dealer message of this iteration they received.
std::vector<SyncMessage> honest_style_echoes(const RoundView& view) {
  std::vector<SyncMessage> out;
  for (const auto& m : view.history) {
    if (!view.corrupted.contains(m.to) || m.from != m.dealer) continue;
    if (!m.token || !verify(m.dealer, *m.token, cb_payload(view.iteration, m.value))) continue;
    for (NodeId y = 0; y < view.n; ++y) out.push_back(SyncMessage{m.to, y, m.dealer, m.value, m.token});
  }
  return out;
}

}  // namespace

std::vector<SyncMessage> SyncConsistentLiar::act(const RoundView& view) {
  if (view.phase == CbPhase::kEcho) return honest_style_echoes(view);
  std::vector<SyncMessage> out;
  for (NodeId x : view.corrupted) {
    const Rational value = fixed_ ? *fixed_ : draw_value(rng_, view.honest_inputs);
    for (NodeId w = 0; w < view.n; ++w) out.push_back(signed_message(x, w, x, view.iteration, value));
  }
  return out;
}

std::vector<SyncMessage> SyncEquivocator::act(const RoundView& view) {
  std::vector<SyncMessage> out;
  if (view.phase == CbPhase::kDealer) {
    split_.clear();
    for (NodeId x : view.corrupted) {
      const Rational a = draw_value(rng_, view.honest_inputs);
      Rational b = draw_value(rng_, view.honest_inputs);
      if (b == a) b += 1;
      split_[x] = {a, b};
      for (NodeId w = 0; w < view.n; ++w) {
        out.push_back(signed_message(x, w, x, view.iteration, rng_.coin() ? a : b));
      }
    }
    return out;
  }
  // Echo round: look up what each honest node was told and relay the other value.
  for (const auto& m : view.history) {
    if (!split_.contains(m.from) || m.from != m.dealer || view.corrupted.contains(m.to)) continue;
    if (!m.token || m.token->payload != cb_payload(view.iteration, m.value)) continue;
    const auto& [a, b] = split_[m.from];
    const Rational& other = m.value == a ? b : a;
    for (NodeId y : view.corrupted) {
      if (cross_all_ || rng_.coin()) out.push_back(signed_message(y, m.to, m.from, view.iteration, other));
    }
  }
  return out;
}

std::vector<SyncMessage> SyncSelectiveDealer::act(const RoundView& view) {
  std::vector<SyncMessage> out;
  if (view.phase != CbPhase::kDealer) return out;
  for (const auto& [x, script] : scripts_) {
    if (!view.corrupted.contains(x)) continue;
    for (NodeId w : script.recipients) out.push_back(signed_message(x, w, x, view.iteration, script.value));
  }
  return out;
}

std::unique_ptr<SyncAdversary> make_sync_adversary(const std::string& name, std::uint64_t seed) {
  if (name == "silent") return std::make_unique<SyncSilent>();
  if (name == "consistent_liar") return std::make_unique<SyncConsistentLiar>(seed);
  if (name == "equivocator") return std::make_unique<SyncEquivocator>(seed);
  throw std::invalid_argument("unknown sync adversary '" + name + "'");
}

}  // namespace pulsesync
