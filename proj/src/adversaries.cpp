#include "pulsesync/adversaries.hpp"

#include <stdexcept>

namespace pulsesync {

namespace {

class ShiftedContext final : public NodeContext {
 public:
  ShiftedContext(NodeContext& inner, const Rational& shift) : inner_(inner), shift_(shift) {}
  NodeId self() const override { return inner_.self(); }
  std::size_t node_count() const override { return inner_.node_count(); }
  LocalTime local_now() const override { return LocalTime(inner_.local_now() + shift_); }
  void send(NodeId to, const Message& msg) override { inner_.send(to, msg); }
  void set_timer(const LocalTime& at, std::uint64_t tag) override { inner_.set_timer(LocalTime(at - shift_), tag); }
  void pulse(std::uint64_t index) override { inner_.pulse(index); }
  void note(ProtocolNote note) override { inner_.note(std::move(note)); }

 private:
  NodeContext& inner_;
  const Rational& shift_;
};

bool is_dealer_send(const Message& msg, NodeId from) { return msg.kind == kTcbKind && msg.subject == from; }

}  // namespace

void ShiftedBehavior::start(NodeContext& ctx) {
  ShiftedContext s(ctx, shift_);
  inner_->start(s);
}

void ShiftedBehavior::on_message(NodeContext& ctx, NodeId from, const Message& msg) {
  ShiftedContext s(ctx, shift_);
  inner_->on_message(s, from, msg);
}

void ShiftedBehavior::on_timer(NodeContext& ctx, std::uint64_t tag) {
  ShiftedContext s(ctx, shift_);
  inner_->on_timer(s, tag);
}

std::unique_ptr<NodeBehavior> ConsistentLiar::puppet(NodeId) {
  return std::make_unique<ShiftedBehavior>(std::make_unique<CpsNode>(params_, CpsOptions{false}), shift_);
}

void Equivocator::on_honest_send(AdversaryContext& ctx, const SendRecord& send) {
  if (!is_dealer_send(send.msg, send.from) || send.msg.round <= last_round_) return;
  last_round_ = send.msg.round;
  std::vector<NodeId> honest;
  for (NodeId v = 0; v < params_.n; ++v) {
    if (!ctx.corrupted().contains(v)) honest.push_back(v);
  }
  const Rational step = honest.size() > 1 ? Rational(spread_ / static_cast<long>(honest.size() - 1)) : Rational(0);
  for (NodeId x : ctx.corrupted()) {
    for (std::size_t k = 0; k < honest.size(); ++k) {
      pending_.push_back(Pending{x, honest[k], last_round_});
      ctx.wake_at(TimePoint(ctx.now() + step * static_cast<long>(k)), pending_.size() - 1);
    }
  }
}

void Equivocator::on_wakeup(AdversaryContext& ctx, std::uint64_t tag) {
  const Pending& p = pending_.at(tag);
  ctx.send(p.from, p.to, tcb_message(p.round, p.from, sign(p.from, tcb_payload(p.round))),
           TimePoint(params_.d - params_.u_tilde));
}

std::optional<TimePoint> EchoRusher::delay_to_faulty(const LinkSend&) {
  return TimePoint(params_.d - params_.u_tilde);
}

void EchoRusher::on_faulty_receive(AdversaryContext& ctx, NodeId at, NodeId from, const Message& msg) {
  if (!is_dealer_send(msg, from) || ctx.corrupted().contains(from)) return;
  const TimePoint fast(params_.d - params_.u_tilde);
  for (NodeId v = 0; v < params_.n; ++v) {
    if (v != from && !ctx.corrupted().contains(v)) ctx.send(at, v, msg, fast);
  }
  if (own_sent_.size() <= at) own_sent_.resize(at + 1, 0);
  if (own_sent_[at] < msg.round) {
    own_sent_[at] = msg.round;
    const Message own = tcb_message(msg.round, at, sign(at, tcb_payload(msg.round)));
    for (NodeId v = 0; v < params_.n; ++v) {
      if (!ctx.corrupted().contains(v)) ctx.send(at, v, own, fast);
    }
  }
}

std::unique_ptr<Adversary> make_des_adversary(const std::string& name, const SystemParams& params,
                                              const AdversaryKnobs& knobs) {
  if (name == "silent") return std::make_unique<SilentAdversary>();
  if (name == "consistent_liar") {
    return std::make_unique<ConsistentLiar>(params, knobs.shift.value_or(Rational(params.S / 2)));
  }
  if (name == "equivocator") return std::make_unique<Equivocator>(params, knobs.spread.value_or(params.S));
  if (name == "echo_rusher") return std::make_unique<EchoRusher>(params);
  throw std::invalid_argument("unknown adversary '" + name + "'");
}

}  // namespace pulsesync
