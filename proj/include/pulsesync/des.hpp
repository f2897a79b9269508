// Deterministic discrete-event simulation over exact continuous time.
//
// Events are ordered by (real time, target node, content order, insertion
// sequence); the content order makes simultaneous events at one node run in
// the same order whenever the node's view is the same. Honest
// behaviors only ever see their own hardware clock readings and message
// contents; the adversary sees everything (rushing, full information) but
// every message it emits passes the unforgeability gate.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <tuple>
#include <string>
#include <vector>

#include "pulsesync/clock.hpp"
#include "pulsesync/core.hpp"
#include "pulsesync/params.hpp"
#include "pulsesync/random.hpp"
#include "pulsesync/signatures.hpp"

namespace pulsesync {

/// Network message. `tokens` must list every signature the message carries.
struct Message {
  std::string kind;
  std::uint64_t round = 0;
  NodeId subject = 0;
  std::vector<SignatureToken> tokens;
  std::string body;

  /// "kind|round|subject|sig(..);sig(..)|body"
  std::string canonical() const;
  friend bool operator==(const Message&, const Message&) = default;
};

/// Free-form protocol bookkeeping attached to the trace (TCB outputs,
/// corrections). Checkers read these; the engine does not interpret them.
struct ProtocolNote {
  std::string kind;
  std::uint64_t round = 0;
  NodeId subject = 0;
  std::optional<Rational> value;
  std::vector<std::optional<Rational>> estimates;
  std::size_t count = 0;
};

/// Handed to an honest (or puppet) behavior on every callback.
class NodeContext {
 public:
  virtual ~NodeContext() = default;
  virtual NodeId self() const = 0;
  virtual std::size_t node_count() const = 0;
  virtual LocalTime local_now() const = 0;
  virtual void send(NodeId to, const Message& msg) = 0;
  void broadcast(const Message& msg) {
    for (NodeId w = 0; w < node_count(); ++w) send(w, msg);
  }
  /// Fires when the hardware clock reads `at`. Throws ModelViolation if at < local_now().
  virtual void set_timer(const LocalTime& at, std::uint64_t tag) = 0;
  virtual void pulse(std::uint64_t index) = 0;
  virtual void note(ProtocolNote note) = 0;
};

class NodeBehavior {
 public:
  virtual ~NodeBehavior() = default;
  virtual void start(NodeContext& ctx) = 0;
  virtual void on_message(NodeContext& ctx, NodeId from, const Message& msg) = 0;
  virtual void on_timer(NodeContext& ctx, std::uint64_t tag) = 0;
};

using BehaviorFactory = std::function<std::unique_ptr<NodeBehavior>(NodeId)>;

struct LinkSend {
  NodeId from = 0;
  NodeId to = 0;
  TimePoint send_time;
  const Message* msg = nullptr;
  /// Either endpoint is corrupted.
  bool faulty_link = false;
};

class DelayPolicy {
 public:
  virtual ~DelayPolicy() = default;
  virtual TimePoint delay(const LinkSend& link) = 0;
};

/// Same delay on every link.
class FixedDelay final : public DelayPolicy {
 public:
  explicit FixedDelay(TimePoint value) : value_(std::move(value)) {}
  TimePoint delay(const LinkSend&) override { return value_; }

 private:
  TimePoint value_;
};

/// One delay for honest links and one for links with a faulty endpoint.
class ClassDelay final : public DelayPolicy {
 public:
  ClassDelay(TimePoint honest, TimePoint faulty) : honest_(std::move(honest)), faulty_(std::move(faulty)) {}
  TimePoint delay(const LinkSend& l) override { return l.faulty_link ? faulty_ : honest_; }

 private:
  TimePoint honest_;
  TimePoint faulty_;
};

/// Uniform over `steps + 1` evenly spaced points of each link's band.
class RandomInBand final : public DelayPolicy {
 public:
  RandomInBand(const SystemParams& p, std::uint64_t seed, std::uint64_t steps = 16)
      : params_(p), rng_(seed), steps_(steps) {}
  TimePoint delay(const LinkSend& l) override;

 private:
  SystemParams params_;
  Rng rng_;
  std::uint64_t steps_;
};

/// Receivers with id below `pivot` get the fastest delay of the band, the rest the slowest.
class SplitDelay final : public DelayPolicy {
 public:
  SplitDelay(const SystemParams& p, NodeId pivot) : params_(p), pivot_(pivot) {}
  TimePoint delay(const LinkSend& l) override;

 private:
  SystemParams params_;
  NodeId pivot_;
};

/// Explicit per-link delays, falling back to `fallback` elsewhere.
class MatrixDelay final : public DelayPolicy {
 public:
  MatrixDelay(std::map<std::pair<NodeId, NodeId>, TimePoint> links, DelayPolicy& fallback)
      : links_(std::move(links)), fallback_(fallback) {}
  TimePoint delay(const LinkSend& l) override;

 private:
  std::map<std::pair<NodeId, NodeId>, TimePoint> links_;
  DelayPolicy& fallback_;
};

enum class EventKind { kSend, kReceive, kTimer, kPulse, kNote };
const char* to_string(EventKind kind);

struct TraceEvent {
  TimePoint t;
  EventKind kind = EventKind::kSend;
  NodeId from = 0;
  NodeId to = 0;
  /// Hardware clock reading of the acting node (sender, receiver, timer or pulse owner).
  LocalTime local_time;
  std::string payload;
  std::optional<std::uint64_t> pulse_index;
  /// Receives only: real time the message was sent.
  std::optional<TimePoint> sent_at;
};

struct PulseRecord {
  NodeId node = 0;
  std::uint64_t index = 0;
  TimePoint t;
  LocalTime local_time;
};

struct NoteRecord {
  TimePoint t;
  NodeId node = 0;
  LocalTime local_time;
  ProtocolNote note;
};

struct ExecutionTrace {
  std::size_t n = 0;
  NodeSet corrupted;
  SystemParams params;
  std::vector<ClockSchedule> clocks;
  TimePoint horizon;
  std::vector<TraceEvent> events;
  /// Honest nodes only.
  std::vector<PulseRecord> pulses;
  std::vector<NoteRecord> notes;

  bool honest(NodeId v) const { return !corrupted.contains(v); }
  std::optional<TimePoint> pulse_time(NodeId v, std::uint64_t index) const;
  /// Largest index every honest node has emitted (0 if none).
  std::uint64_t complete_pulses() const;
};

/// One entry of a node's local view; all comparisons are exact.
struct LocalEntry {
  LocalTime local_time;
  EventKind kind = EventKind::kSend;
  NodeId from = 0;
  NodeId to = 0;
  std::string payload;
  std::optional<std::uint64_t> pulse_index;

  friend bool operator==(const LocalEntry&, const LocalEntry&) = default;
};

/// Sends, receipts and pulses of `node`, in the order they happened.
std::vector<LocalEntry> local_view(const ExecutionTrace& trace, NodeId node);

/// {t, kind, from, to, local_time, payload, pulse_index}, one per line.
void write_trace_jsonl(const ExecutionTrace& trace, std::ostream& out);

/// A send as seen by observers and the adversary, with its scheduled arrival.
struct SendRecord {
  NodeId from = 0;
  NodeId to = 0;
  Message msg;
  TimePoint send_time;
  TimePoint arrival_time;
};

class Simulator;

class AdversaryContext {
 public:
  explicit AdversaryContext(Simulator& sim) : sim_(sim) {}
  TimePoint now() const;
  const ExecutionTrace& trace() const;
  const SystemParams& params() const;
  const NodeSet& corrupted() const;
  /// Faulty send now; gated when it happens.
  void send(NodeId from, NodeId to, const Message& msg, const TimePoint& delay);
  void wake_at(const TimePoint& t, std::uint64_t tag);

 private:
  Simulator& sim_;
};

class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual void start(AdversaryContext&) {}
  /// Called synchronously whenever an honest node sends.
  virtual void on_honest_send(AdversaryContext&, const SendRecord&) {}
  /// A corrupted node without a puppet behavior received a message.
  virtual void on_faulty_receive(AdversaryContext&, NodeId /*at*/, NodeId /*from*/, const Message&) {}
  virtual void on_wakeup(AdversaryContext&, std::uint64_t /*tag*/) {}
  /// Optional behavior run by a corrupted node; its sends are gated like any faulty send.
  virtual std::unique_ptr<NodeBehavior> puppet(NodeId) { return nullptr; }
  /// Overrides the policy on links into a corrupted node (must stay in band).
  virtual std::optional<TimePoint> delay_to_faulty(const LinkSend&) { return std::nullopt; }
};

/// Corrupted nodes do nothing at all.
class NullAdversary final : public Adversary {};

/// How a node's message to itself travels.
enum class SelfDelivery {
  /// Through the delay policy like any other link.
  kThroughPolicy,
  /// Arrives when the sender's own clock has advanced by d.
  kLocalDelay,
};

struct SimulationSetup {
  SystemParams params;
  std::vector<ClockSchedule> clocks;
  NodeSet corrupted;
  TimePoint horizon;
  /// Stop once every honest node emitted this pulse.
  std::optional<std::uint64_t> stop_after_pulse;
  std::uint64_t max_events = 20'000'000;
  SelfDelivery self_delivery = SelfDelivery::kThroughPolicy;
};

class Simulator {
 public:
  Simulator(SimulationSetup setup, BehaviorFactory honest, DelayPolicy& delays, Adversary& adversary);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  /// Runs every start() hook at time 0. Called implicitly by step()/run().
  void start();
  /// Processes one event; false once the queue is empty, the horizon is
  /// passed, or the pulse target is reached.
  bool step();
  std::optional<TimePoint> next_event_time() const;
  void run();
  bool finished() const;

  TimePoint now() const { return now_; }
  const SimulationSetup& setup() const { return setup_; }
  const ExecutionTrace& trace() const { return trace_; }
  ExecutionTrace take_trace() { return std::move(trace_); }
  const ObservationLedger& ledger() const { return ledger_; }
  std::uint64_t events_processed() const { return processed_; }

  /// Schedules a faulty send at send_time (>= now) with the given delay;
  /// gated against the ledger when it happens.
  void schedule_faulty_send(NodeId from, NodeId to, Message msg, const TimePoint& send_time,
                            const TimePoint& delay);
  /// Called for every honest send, after the adversary hook.
  void set_send_observer(std::function<void(const SendRecord&)> observer) { observer_ = std::move(observer); }

 private:
  friend class AdversaryContext;
  class Context;
  struct QueuedEvent;
  using EventKey = std::tuple<TimePoint, NodeId, std::string, std::uint64_t>;

  void push(const TimePoint& t, NodeId target, std::unique_ptr<QueuedEvent> ev);
  void emit_faulty(NodeId from, NodeId to, const Message& msg, const TimePoint& delay);
  void node_send(NodeId from, NodeId to, const Message& msg);
  void deliver(NodeId to, QueuedEvent& ev);
  void check_band(NodeId from, NodeId to, const TimePoint& delay) const;
  void wake(const TimePoint& t, std::uint64_t tag);
  void record(EventKind kind, NodeId from, NodeId to, NodeId actor, std::string payload,
              std::optional<std::uint64_t> pulse = std::nullopt);
  void note_pulse(NodeId v, std::uint64_t index);
  NodeBehavior* behavior(NodeId v) { return behaviors_[v].get(); }
  bool target_reached() const;

  SimulationSetup setup_;
  DelayPolicy& delays_;
  Adversary& adversary_;
  std::vector<std::unique_ptr<NodeBehavior>> behaviors_;
  std::map<EventKey, std::unique_ptr<QueuedEvent>> queue_;
  std::uint64_t seq_ = 0;
  std::uint64_t processed_ = 0;
  TimePoint now_;
  bool started_ = false;
  ExecutionTrace trace_;
  ObservationLedger ledger_;
  std::vector<std::uint64_t> last_pulse_;
  std::function<void(const SendRecord&)> observer_;
};

/// Builds a simulator, runs it to completion and returns the trace.
ExecutionTrace run_simulation(const SimulationSetup& setup, const BehaviorFactory& honest, DelayPolicy& delays,
                              Adversary& adversary);

}  // namespace pulsesync
