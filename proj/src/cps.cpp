#include "pulsesync/cps.hpp"

#include <algorithm>

namespace pulsesync {

Rational offset_estimate(const SystemParams& p, const LocalTime& h, const LocalTime& pulse_local) {
  return Rational(h - pulse_local - p.d + p.u - p.S);
}

CorrectionResult cps_compute_correction(std::span<const std::optional<Rational>> estimates, std::size_t f,
                                        bool strict) {
  CorrectionResult out;
  std::vector<std::pair<Rational, NodeId>> kept;
  for (std::size_t w = 0; w < estimates.size(); ++w) {
    if (estimates[w]) {
      kept.emplace_back(*estimates[w], static_cast<NodeId>(w));
    } else {
      ++out.bottoms;
    }
  }
  if (strict && out.bottoms > f) {
    throw ModelViolation("correction: b = " + std::to_string(out.bottoms) + " exceeds f = " + std::to_string(f));
  }
  std::sort(kept.begin(), kept.end());
  const std::size_t drop = out.bottoms >= f ? 0 : f - out.bottoms;
  if (kept.size() <= 2 * drop) {
    if (strict) throw ModelViolation("correction: no estimate survives trimming");
    out.delta = 0;
    return out;
  }
  const Rational& lo = kept[drop].first;
  const Rational& hi = kept[kept.size() - 1 - drop].first;
  out.retained = Interval{lo, hi};
  out.delta = (lo + hi) / 2;
  return out;
}

CpsNode::CpsNode(const SystemParams& params, CpsOptions options) : params_(params), options_(options) {}

std::uint64_t CpsNode::tag(Timer kind, std::uint64_t round, NodeId dealer) {
  return (round << 24) | (static_cast<std::uint64_t>(kind) << 20) | (dealer & 0xfffffu);
}

void CpsNode::start(NodeContext& ctx) {
  round_ = 0;
  schedule_next(ctx, params_.S);
}

void CpsNode::schedule_next(NodeContext& ctx, const LocalTime& at) {
  const LocalTime now = ctx.local_now();
  if (at < now) {
    if (options_.strict) {
      throw ModelViolation("node " + std::to_string(ctx.self()) + " round " + std::to_string(round_) +
                           ": next pulse at local " + format_rational(at) + " already passed (" +
                           format_rational(now) + ")");
    }
    ctx.note(ProtocolNote{"anomaly", round_, ctx.self(), Rational(at - now), {}, 0});
    ctx.set_timer(now, tag(Timer::kPulse, round_ + 1));
    return;
  }
  ctx.set_timer(at, tag(Timer::kPulse, round_ + 1));
}

void CpsNode::emit_pulse(NodeContext& ctx) {
  ++round_;
  round_open_ = true;
  const LocalTime P = ctx.local_now();
  pulse_local_ = P;
  ctx.pulse(round_);
  instances_.clear();
  for (NodeId w = 0; w < ctx.node_count(); ++w) instances_.emplace_back(params_, round_, w, ctx.self(), P);
  ctx.set_timer(instances_.front().dealer_send_time(), tag(Timer::kDealerSend, round_));
  ctx.set_timer(instances_.front().deadline(), tag(Timer::kDeadline, round_));
}

void CpsNode::on_timer(NodeContext& ctx, std::uint64_t t) {
  const std::uint64_t round = t >> 24;
  const auto kind = static_cast<Timer>((t >> 20) & 0xf);
  const auto dealer = static_cast<NodeId>(t & 0xfffff);
  switch (kind) {
    case Timer::kPulse:
      emit_pulse(ctx);
      break;
    case Timer::kDealerSend:
      if (round == round_) ctx.broadcast(tcb_message(round_, ctx.self(), sign(ctx.self(), tcb_payload(round_))));
      break;
    case Timer::kFinalize:
      if (round == round_ && round_open_ && dealer < instances_.size()) finalize(ctx, instances_[dealer]);
      break;
    case Timer::kDeadline:
      if (round == round_ && round_open_) {
        for (auto& inst : instances_) finalize(ctx, inst);
      }
      break;
  }
}

void CpsNode::on_message(NodeContext& ctx, NodeId from, const Message& msg) {
  if (msg.kind != kTcbKind || !round_open_ || msg.round != round_ || msg.subject >= instances_.size()) return;
  TcbInstance& inst = instances_[msg.subject];
  const LocalTime now = ctx.local_now();
  for (const auto& token : msg.tokens) {
    const TcbInstance::Reaction r = inst.on_token(from, token, now);
    if (r.echo) {
      const Message echo = tcb_message(round_, msg.subject, token);
      for (NodeId w = 0; w < ctx.node_count(); ++w) {
        if (w != ctx.self()) ctx.send(w, echo);
      }
    }
    if (r.finalize_at) ctx.set_timer(*r.finalize_at, tag(Timer::kFinalize, round_, msg.subject));
  }
}

void CpsNode::finalize(NodeContext& ctx, TcbInstance& inst) {
  if (inst.done() || !inst.finalize(ctx.local_now())) return;
  ctx.note(ProtocolNote{"tcb_output", round_, inst.dealer(), inst.output(), {}, 0});
  maybe_complete(ctx);
}

void CpsNode::maybe_complete(NodeContext& ctx) {
  if (!std::all_of(instances_.begin(), instances_.end(), [](const TcbInstance& i) { return i.done(); })) return;
  round_open_ = false;
  std::vector<std::optional<Rational>> estimates;
  for (const auto& inst : instances_) {
    if (inst.output()) {
      estimates.emplace_back(offset_estimate(params_, *inst.output(), *pulse_local_));
    } else {
      estimates.emplace_back(std::nullopt);
    }
  }
  const std::size_t f = params_.f;
  CorrectionResult c;
  const std::size_t bottoms = static_cast<std::size_t>(std::count(estimates.begin(), estimates.end(), std::nullopt));
  if (!options_.strict && bottoms > f) {
    ctx.note(ProtocolNote{"anomaly", round_, ctx.self(), Rational(static_cast<long>(bottoms)), {}, bottoms});
  }
  c = cps_compute_correction(estimates, f, options_.strict);
  correction_ = c.delta;
  ctx.note(ProtocolNote{"correction", round_, ctx.self(), c.delta, estimates, c.bottoms});
  schedule_next(ctx, LocalTime(*pulse_local_ + c.delta + params_.T));
}

BehaviorFactory make_cps_factory(const SystemParams& params, CpsOptions options) {
  return [params, options](NodeId) { return std::make_unique<CpsNode>(params, options); };
}

}  // namespace pulsesync
