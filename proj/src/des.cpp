#include "pulsesync/des.hpp"

#include <algorithm>
#include <limits>

#include <json.hpp>

namespace pulsesync {

namespace {

constexpr NodeId kAdversaryTarget = std::numeric_limits<NodeId>::max();

Rational band_low(const SystemParams& p, bool faulty_link) {
  return Rational(p.d - (faulty_link ? p.u_tilde : p.u));
}

std::string note_payload(const ProtocolNote& note) {
  std::string s = note.kind + "|" + std::to_string(note.round) + "|" + std::to_string(note.subject) + "|";
  s += note.value ? format_rational(*note.value) : std::string("bot");
  if (!note.estimates.empty()) {
    s += "|";
    for (std::size_t i = 0; i < note.estimates.size(); ++i) {
      if (i) s += ",";
      s += note.estimates[i] ? format_rational(*note.estimates[i]) : std::string("bot");
    }
    s += "|b=" + std::to_string(note.count);
  }
  return s;
}

}  // namespace

std::string Message::canonical() const {
  std::string s = kind + "|" + std::to_string(round) + "|" + std::to_string(subject) + "|";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ";";
    s += tokens[i].to_string();
  }
  s += "|" + body;
  return s;
}

TimePoint RandomInBand::delay(const LinkSend& l) {
  return rng_.grid(band_low(params_, l.faulty_link), params_.d, steps_);
}

TimePoint SplitDelay::delay(const LinkSend& l) {
  return l.to < pivot_ ? band_low(params_, l.faulty_link) : params_.d;
}

TimePoint MatrixDelay::delay(const LinkSend& l) {
  if (auto it = links_.find({l.from, l.to}); it != links_.end()) return it->second;
  return fallback_.delay(l);
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kSend: return "send";
    case EventKind::kReceive: return "receive";
    case EventKind::kTimer: return "timer";
    case EventKind::kPulse: return "pulse";
    case EventKind::kNote: return "note";
  }
  return "?";
}

std::optional<TimePoint> ExecutionTrace::pulse_time(NodeId v, std::uint64_t index) const {
  for (const auto& p : pulses) {
    if (p.node == v && p.index == index) return p.t;
  }
  return std::nullopt;
}

std::uint64_t ExecutionTrace::complete_pulses() const {
  std::vector<std::uint64_t> last(n, 0);
  for (const auto& p : pulses) last[p.node] = std::max(last[p.node], p.index);
  std::uint64_t k = std::numeric_limits<std::uint64_t>::max();
  for (NodeId v = 0; v < n; ++v) {
    if (honest(v)) k = std::min(k, last[v]);
  }
  return k == std::numeric_limits<std::uint64_t>::max() ? 0 : k;
}

std::vector<LocalEntry> local_view(const ExecutionTrace& trace, NodeId node) {
  std::vector<LocalEntry> view;
  for (const auto& e : trace.events) {
    const bool mine = (e.kind == EventKind::kReceive && e.to == node) || (e.kind == EventKind::kSend && e.from == node) ||
                      (e.kind == EventKind::kPulse && e.from == node);
    if (mine) view.push_back(LocalEntry{e.local_time, e.kind, e.from, e.to, e.payload, e.pulse_index});
  }
  return view;
}

void write_trace_jsonl(const ExecutionTrace& trace, std::ostream& out) {
  for (const auto& e : trace.events) {
    nlohmann::ordered_json j;
    j["t"] = format_rational(e.t);
    j["kind"] = to_string(e.kind);
    j["from"] = e.from;
    j["to"] = e.to;
    j["local_time"] = format_rational(e.local_time);
    j["payload"] = e.payload;
    j["pulse_index"] = e.pulse_index ? nlohmann::ordered_json(*e.pulse_index) : nlohmann::ordered_json(nullptr);
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------

struct Simulator::QueuedEvent {
  enum class Type { kStart, kDeliver, kTimer, kWake, kFaultySend };
  Type type = Type::kStart;
  NodeId from = 0;
  NodeId to = 0;
  Message msg;
  std::uint64_t tag = 0;
  TimePoint send_time;
  TimePoint delay;
  /// Self-message delivered by the sender's own clock; no band applies.
  bool local = false;
};

class Simulator::Context final : public NodeContext {
 public:
  Context(Simulator& sim, NodeId self) : sim_(sim), self_(self) {}
  NodeId self() const override { return self_; }
  std::size_t node_count() const override { return sim_.setup_.clocks.size(); }
  LocalTime local_now() const override { return sim_.setup_.clocks[self_].at(sim_.now_); }
  void send(NodeId to, const Message& msg) override { sim_.node_send(self_, to, msg); }
  void set_timer(const LocalTime& at, std::uint64_t tag) override {
    if (at < local_now()) {
      throw ModelViolation("node " + std::to_string(self_) + " set a timer in the past (" + format_rational(at) +
                           " < " + format_rational(local_now()) + ")");
    }
    auto ev = std::make_unique<QueuedEvent>();
    ev->type = QueuedEvent::Type::kTimer;
    ev->tag = tag;
    sim_.push(sim_.setup_.clocks[self_].inverse(at), self_, std::move(ev));
  }
  void pulse(std::uint64_t index) override { sim_.note_pulse(self_, index); }
  void note(ProtocolNote note) override {
    const TimePoint& t = sim_.now_;
    sim_.record(EventKind::kNote, self_, self_, self_, note_payload(note));
    if (sim_.trace_.honest(self_)) {
      sim_.trace_.notes.push_back(NoteRecord{t, self_, local_now(), std::move(note)});
    }
  }

 private:
  Simulator& sim_;
  NodeId self_;
};

TimePoint AdversaryContext::now() const { return sim_.now_; }
const ExecutionTrace& AdversaryContext::trace() const { return sim_.trace_; }
const SystemParams& AdversaryContext::params() const { return sim_.setup_.params; }
const NodeSet& AdversaryContext::corrupted() const { return sim_.setup_.corrupted; }
void AdversaryContext::send(NodeId from, NodeId to, const Message& msg, const TimePoint& delay) {
  sim_.emit_faulty(from, to, msg, delay);
}
void AdversaryContext::wake_at(const TimePoint& t, std::uint64_t tag) { sim_.wake(t, tag); }

Simulator::Simulator(SimulationSetup setup, BehaviorFactory honest, DelayPolicy& delays, Adversary& adversary)
    : setup_(std::move(setup)), delays_(delays), adversary_(adversary) {
  const std::size_t n = setup_.clocks.size();
  if (n == 0 && setup_.params.n != 0) throw std::invalid_argument("simulation needs one clock per node");
  if (setup_.params.n != 0 && setup_.params.n != n) throw std::invalid_argument("clock count differs from n");
  for (NodeId v : setup_.corrupted) {
    if (v >= n) throw std::invalid_argument("corrupted id out of range");
  }
  if (setup_.corrupted.size() > setup_.params.f) throw std::invalid_argument("more corrupted nodes than f");
  for (const auto& c : setup_.clocks) {
    if (!c.rates_within(setup_.params.theta)) throw std::invalid_argument("clock rate exceeds theta");
  }
  behaviors_.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    behaviors_[v] = setup_.corrupted.contains(v) ? adversary_.puppet(v) : (honest ? honest(v) : nullptr);
  }
  trace_.n = n;
  trace_.corrupted = setup_.corrupted;
  trace_.params = setup_.params;
  trace_.clocks = setup_.clocks;
  trace_.horizon = setup_.horizon;
  last_pulse_.assign(n, 0);
}

Simulator::~Simulator() = default;

void Simulator::push(const TimePoint& t, NodeId target, std::unique_ptr<QueuedEvent> ev) {
  if (t < now_) throw ModelViolation("event scheduled in the past");
  // Same-instant events at one node run in an order fixed by their content,
  // never by when they were scheduled.
  std::string order;
  switch (ev->type) {
    case QueuedEvent::Type::kStart:
      order = "0";
      break;
    case QueuedEvent::Type::kTimer:
      order = "1|" + std::to_string(ev->tag);
      break;
    case QueuedEvent::Type::kDeliver:
      order = "2|" + std::to_string(ev->from) + "|" + ev->msg.canonical();
      break;
    case QueuedEvent::Type::kFaultySend:
      order = "3|" + std::to_string(ev->to) + "|" + ev->msg.canonical();
      break;
    case QueuedEvent::Type::kWake:
      order = "4|" + std::to_string(ev->tag);
      break;
  }
  queue_.emplace(EventKey{t, target, std::move(order), seq_++}, std::move(ev));
}

void Simulator::start() {
  if (started_) return;
  started_ = true;
  for (NodeId v = 0; v < behaviors_.size(); ++v) {
    auto ev = std::make_unique<QueuedEvent>();
    ev->type = QueuedEvent::Type::kStart;
    push(TimePoint(0), v, std::move(ev));
  }
  AdversaryContext ctx(*this);
  adversary_.start(ctx);
}

void Simulator::record(EventKind kind, NodeId from, NodeId to, NodeId actor, std::string payload,
                       std::optional<std::uint64_t> pulse) {
  trace_.events.push_back(
      TraceEvent{now_, kind, from, to, setup_.clocks[actor].at(now_), std::move(payload), pulse, std::nullopt});
}

void Simulator::note_pulse(NodeId v, std::uint64_t index) {
  record(EventKind::kPulse, v, v, v, "pulse", index);
  if (trace_.honest(v)) {
    trace_.pulses.push_back(PulseRecord{v, index, now_, setup_.clocks[v].at(now_)});
    last_pulse_[v] = std::max(last_pulse_[v], index);
  }
}

void Simulator::node_send(NodeId from, NodeId to, const Message& msg) {
  const std::size_t n = behaviors_.size();
  if (to >= n) throw ModelViolation("send to unknown node " + std::to_string(to));
  const bool faulty_sender = setup_.corrupted.contains(from);
  if (faulty_sender) {
    LinkSend link{from, to, now_, &msg, true};
    emit_faulty(from, to, msg, delays_.delay(link));
    return;
  }

  auto ev = std::make_unique<QueuedEvent>();
  ev->type = QueuedEvent::Type::kDeliver;
  ev->from = from;
  ev->to = to;
  ev->msg = msg;
  ev->send_time = now_;
  TimePoint arrival;
  if (from == to && setup_.self_delivery == SelfDelivery::kLocalDelay) {
    const ClockSchedule& H = setup_.clocks[from];
    arrival = H.inverse(H.at(now_) + setup_.params.d);
    ev->local = true;
  } else {
    LinkSend link{from, to, now_, &msg, setup_.corrupted.contains(to)};
    std::optional<TimePoint> chosen;
    if (link.faulty_link) chosen = adversary_.delay_to_faulty(link);
    arrival = now_ + (chosen ? *chosen : delays_.delay(link));
  }
  ev->delay = arrival - now_;
  record(EventKind::kSend, from, to, from, msg.canonical());
  if (setup_.corrupted.contains(to)) {
    for (const auto& t : msg.tokens) ledger_.observe(t, arrival);
  }
  SendRecord rec{from, to, msg, now_, arrival};
  push(arrival, to, std::move(ev));
  AdversaryContext ctx(*this);
  adversary_.on_honest_send(ctx, rec);
  if (observer_) observer_(rec);
}

void Simulator::emit_faulty(NodeId from, NodeId to, const Message& msg, const TimePoint& delay) {
  if (!setup_.corrupted.contains(from)) {
    throw ModelViolation("adversary sent on behalf of honest node " + std::to_string(from));
  }
  if (to >= behaviors_.size()) throw ModelViolation("faulty send to unknown node " + std::to_string(to));
  if (!adversary_may_send(ledger_, msg.tokens, now_, setup_.corrupted)) {
    std::string which;
    for (const auto& t : msg.tokens) {
      if (!adversary_may_send(ledger_, std::span(&t, 1), now_, setup_.corrupted)) which += " " + t.to_string();
    }
    throw ModelViolation("unforgeability violated at t=" + format_rational(now_) + " by node " +
                         std::to_string(from) + ":" + which);
  }
  auto ev = std::make_unique<QueuedEvent>();
  ev->type = QueuedEvent::Type::kDeliver;
  ev->from = from;
  ev->to = to;
  ev->msg = msg;
  ev->send_time = now_;
  ev->delay = delay;
  record(EventKind::kSend, from, to, from, msg.canonical());
  const TimePoint arrival = now_ + delay;
  if (setup_.corrupted.contains(to)) {
    for (const auto& t : msg.tokens) ledger_.observe(t, arrival);
  }
  push(arrival, to, std::move(ev));
}

void Simulator::schedule_faulty_send(NodeId from, NodeId to, Message msg, const TimePoint& send_time,
                                     const TimePoint& delay) {
  if (send_time < now_) {
    throw ModelViolation("faulty send scheduled in the past (" + format_rational(send_time) + " < " +
                         format_rational(now_) + ")");
  }
  auto ev = std::make_unique<QueuedEvent>();
  ev->type = QueuedEvent::Type::kFaultySend;
  ev->from = from;
  ev->to = to;
  ev->msg = std::move(msg);
  ev->delay = delay;
  push(send_time, from, std::move(ev));
}

void Simulator::wake(const TimePoint& t, std::uint64_t tag) {
  auto ev = std::make_unique<QueuedEvent>();
  ev->type = QueuedEvent::Type::kWake;
  ev->tag = tag;
  push(t, kAdversaryTarget, std::move(ev));
}

void Simulator::check_band(NodeId from, NodeId to, const TimePoint& delay) const {
  const bool faulty_link = setup_.corrupted.contains(from) || setup_.corrupted.contains(to);
  const Rational low = band_low(setup_.params, faulty_link);
  if (delay < low || delay > setup_.params.d) {
    throw ModelViolation("delay " + format_rational(delay) + " on link " + std::to_string(from) + "->" +
                         std::to_string(to) + " outside [" + format_rational(low) + ", " +
                         format_rational(setup_.params.d) + "]");
  }
}

void Simulator::deliver(NodeId to, QueuedEvent& ev) {
  if (!ev.local) check_band(ev.from, to, ev.delay);
  record(EventKind::kReceive, ev.from, to, to, ev.msg.canonical());
  trace_.events.back().sent_at = ev.send_time;
  if (NodeBehavior* b = behavior(to)) {
    Context ctx(*this, to);
    b->on_message(ctx, ev.from, ev.msg);
  } else if (setup_.corrupted.contains(to)) {
    AdversaryContext ctx(*this);
    adversary_.on_faulty_receive(ctx, to, ev.from, ev.msg);
  }
}

bool Simulator::target_reached() const {
  if (!setup_.stop_after_pulse) return false;
  for (NodeId v = 0; v < last_pulse_.size(); ++v) {
    if (trace_.honest(v) && last_pulse_[v] < *setup_.stop_after_pulse) return false;
  }
  return true;
}

bool Simulator::finished() const {
  if (!started_) return false;
  if (queue_.empty() || target_reached()) return true;
  return std::get<0>(queue_.begin()->first) > setup_.horizon;
}

std::optional<TimePoint> Simulator::next_event_time() const {
  if (!started_) return TimePoint(0);
  if (finished()) return std::nullopt;
  return std::get<0>(queue_.begin()->first);
}

bool Simulator::step() {
  start();
  if (finished()) return false;
  if (++processed_ > setup_.max_events) {
    throw ModelViolation("event storm: more than " + std::to_string(setup_.max_events) + " events");
  }
  auto node = queue_.extract(queue_.begin());
  const auto& [t, target, order, seq] = node.key();
  (void)order;
  (void)seq;
  now_ = t;
  QueuedEvent& ev = *node.mapped();
  switch (ev.type) {
    case QueuedEvent::Type::kStart:
      if (NodeBehavior* b = behavior(target)) {
        Context ctx(*this, target);
        b->start(ctx);
      }
      break;
    case QueuedEvent::Type::kDeliver:
      deliver(target, ev);
      break;
    case QueuedEvent::Type::kTimer:
      record(EventKind::kTimer, target, target, target, "timer|" + std::to_string(ev.tag));
      if (NodeBehavior* b = behavior(target)) {
        Context ctx(*this, target);
        b->on_timer(ctx, ev.tag);
      }
      break;
    case QueuedEvent::Type::kWake: {
      AdversaryContext ctx(*this);
      adversary_.on_wakeup(ctx, ev.tag);
      break;
    }
    case QueuedEvent::Type::kFaultySend:
      emit_faulty(ev.from, ev.to, ev.msg, ev.delay);
      break;
  }
  return true;
}

void Simulator::run() {
  while (step()) {
  }
}

ExecutionTrace run_simulation(const SimulationSetup& setup, const BehaviorFactory& honest, DelayPolicy& delays,
                              Adversary& adversary) {
  Simulator sim(setup, honest, delays, adversary);
  sim.run();
  return sim.take_trace();
}

}  // namespace pulsesync
