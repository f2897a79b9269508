#include <gtest/gtest.h>

#include <sstream>

#include "pulsesync/des.hpp"

namespace pulsesync {
namespace {

SystemParams small_params(std::size_t n = 3, std::size_t f = 1) {
  SystemParams p;
  p.n = n;
  p.f = f;
  p.d = 1;
  p.u = make_rational(1, 10);
  p.u_tilde = make_rational(1, 5);
  p.theta = make_rational(11, 10);
  p.S = 1;
  p.T = 10;
  p.delta = measurement_error_bound(p.theta, p.d, p.u, p.S);
  return p;
}

SimulationSetup setup_for(const SystemParams& p, NodeSet corrupted = {}) {
  SimulationSetup s;
  s.params = p;
  s.clocks.assign(p.n, ClockSchedule::identity());
  s.corrupted = std::move(corrupted);
  s.horizon = 50;
  return s;
}

Message ping(std::uint64_t round, const std::string& body = "") { return Message{"ping", round, 0, {}, body}; }

// Node 0 sends one ping to node 1 at start; every receiver pulses once per receipt.
class Pinger final : public NodeBehavior {
 public:
  void start(NodeContext& ctx) override {
    if (ctx.self() == 0) ctx.send(1, ping(1));
  }
  void on_message(NodeContext& ctx, NodeId, const Message&) override { ctx.pulse(++count_); }
  void on_timer(NodeContext&, std::uint64_t) override {}

 private:
  std::uint64_t count_ = 0;
};

BehaviorFactory pingers() {
  return [](NodeId) { return std::make_unique<Pinger>(); };
}

TEST(Simulator, SilentNodesProduceNoMessages) {
  class Quiet final : public NodeBehavior {
    void start(NodeContext&) override {}
    void on_message(NodeContext&, NodeId, const Message&) override {}
    void on_timer(NodeContext&, std::uint64_t) override {}
  };
  FixedDelay delay(1);
  NullAdversary adv;
  const auto trace = run_simulation(setup_for(small_params()), [](NodeId) { return std::make_unique<Quiet>(); },
                                    delay, adv);
  for (const auto& e : trace.events) {
    EXPECT_NE(e.kind, EventKind::kSend);
    EXPECT_NE(e.kind, EventKind::kReceive);
  }
}

TEST(Simulator, MaxDelayDeliversAtExactlyD) {
  FixedDelay delay(1);
  NullAdversary adv;
  const auto trace = run_simulation(setup_for(small_params(), {}), pingers(), delay, adv);
  std::size_t receives = 0;
  for (const auto& e : trace.events) {
    if (e.kind != EventKind::kReceive) continue;
    ++receives;
    EXPECT_EQ(e.t, Rational(1));
    EXPECT_EQ(e.to, 1u);
    EXPECT_EQ(e.sent_at, std::optional<TimePoint>(Rational(0)));
  }
  EXPECT_EQ(receives, 1u);
  EXPECT_EQ(trace.pulse_time(1, 1), std::optional<TimePoint>(Rational(1)));
}

TEST(Simulator, ReceiveUsesReceiverClock) {
  SimulationSetup s = setup_for(small_params());
  s.clocks[1] = ClockSchedule::constant_rate(make_rational(11, 10), 2);
  FixedDelay delay(1);
  NullAdversary adv;
  const auto trace = run_simulation(s, pingers(), delay, adv);
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::kReceive) {
      EXPECT_EQ(e.local_time, 2 + make_rational(11, 10));
    }
  }
}

TEST(Simulator, DelayOutsideBandIsAViolation) {
  NullAdversary adv;
  FixedDelay too_slow(2);
  EXPECT_THROW(run_simulation(setup_for(small_params()), pingers(), too_slow, adv), ModelViolation);
  // 1 - 1/10 is the fastest honest delay; anything faster leaves the band.
  FixedDelay too_fast(make_rational(17, 20));
  EXPECT_THROW(run_simulation(setup_for(small_params()), pingers(), too_fast, adv), ModelViolation);
  FixedDelay edge(make_rational(9, 10));
  EXPECT_NO_THROW(run_simulation(setup_for(small_params()), pingers(), edge, adv));
}

TEST(Simulator, FaultyLinksUseTheWiderBand) {
  // Node 1 is corrupted, so 0 -> 1 may take d - u_tilde = 4/5.
  FixedDelay fast(make_rational(4, 5));
  NullAdversary adv;
  EXPECT_NO_THROW(run_simulation(setup_for(small_params(), {1}), pingers(), fast, adv));
}

TEST(Simulator, TimerInThePastIsAViolation) {
  class Backwards final : public NodeBehavior {
    void start(NodeContext& ctx) override { ctx.set_timer(2, 1); }
    void on_message(NodeContext&, NodeId, const Message&) override {}
    void on_timer(NodeContext& ctx, std::uint64_t) override { ctx.set_timer(1, 2); }
  };
  FixedDelay delay(1);
  NullAdversary adv;
  EXPECT_THROW(run_simulation(setup_for(small_params()), [](NodeId) { return std::make_unique<Backwards>(); },
                              delay, adv),
               ModelViolation);
}

TEST(Simulator, ForgedHonestSignatureIsRejected) {
  class Forger final : public Adversary {
   public:
    void start(AdversaryContext& ctx) override { ctx.wake_at(1, 0); }
    void on_wakeup(AdversaryContext& ctx, std::uint64_t) override {
      ctx.send(2, 1, Message{"ping", 1, 0, {sign(0, "never-sent")}, ""}, 1);
    }
  } adv;
  FixedDelay delay(1);
  EXPECT_THROW(run_simulation(setup_for(small_params(), {2}), pingers(), delay, adv), ModelViolation);
}

TEST(Simulator, RelayOfObservedSignatureIsAllowed) {
  // Node 0 signs and sends to corrupted node 2; the adversary relays after arrival.
  class Signer final : public NodeBehavior {
    void start(NodeContext& ctx) override {
      if (ctx.self() == 0) ctx.send(2, Message{"sig", 1, 0, {sign(0, "p")}, ""});
    }
    void on_message(NodeContext& ctx, NodeId, const Message&) override { ctx.pulse(1); }
    void on_timer(NodeContext&, std::uint64_t) override {}
  };
  class Relay final : public Adversary {
   public:
    void on_faulty_receive(AdversaryContext& ctx, NodeId at, NodeId, const Message& msg) override {
      ctx.send(at, 1, msg, 1);
    }
  } adv;
  FixedDelay delay(1);
  const auto trace =
      run_simulation(setup_for(small_params(), {2}), [](NodeId) { return std::make_unique<Signer>(); }, delay, adv);
  EXPECT_EQ(trace.pulse_time(1, 1), std::optional<TimePoint>(Rational(2)));
}

TEST(Simulator, RunsAreDeterministic) {
  auto once = [] {
    RandomInBand delay(small_params(), 77);
    NullAdversary adv;
    class Chatter final : public NodeBehavior {
      void start(NodeContext& ctx) override { ctx.broadcast(ping(1)); }
      void on_message(NodeContext& ctx, NodeId, const Message& m) override {
        if (m.round < 4) ctx.broadcast(ping(m.round + 1, std::to_string(ctx.self())));
      }
      void on_timer(NodeContext&, std::uint64_t) override {}
    };
    const auto trace =
        run_simulation(setup_for(small_params()), [](NodeId) { return std::make_unique<Chatter>(); }, delay, adv);
    std::ostringstream out;
    write_trace_jsonl(trace, out);
    return out.str();
  };
  const std::string a = once();
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, once());
}

TEST(LocalView, SameTraceSameViewAndOneDelayChangesIt) {
  FixedDelay delay(1);
  NullAdversary adv;
  const auto trace = run_simulation(setup_for(small_params()), pingers(), delay, adv);
  EXPECT_EQ(local_view(trace, 1), local_view(trace, 1));
  EXPECT_FALSE(local_view(trace, 1).empty());

  FixedDelay faster(make_rational(19, 20));
  const auto other = run_simulation(setup_for(small_params()), pingers(), faster, adv);
  EXPECT_NE(local_view(trace, 1), local_view(other, 1));
  // The sender cannot tell.
  EXPECT_EQ(local_view(trace, 0), local_view(other, 0));
}

// Two messages reaching node 2 at the same instant are handled in content
// order, not in the order they were sent.
TEST(Simulator, SimultaneousDeliveriesRunInContentOrder) {
  class Order final : public NodeBehavior {
   public:
    void start(NodeContext& ctx) override {
      if (ctx.self() != 0) return;
      ctx.send(2, ping(1, "z"));
      ctx.send(2, ping(1, "b"));
    }
    void on_message(NodeContext&, NodeId, const Message&) override {}
    void on_timer(NodeContext&, std::uint64_t) override {}
  };
  FixedDelay delay(1);
  NullAdversary adv;
  const auto trace =
      run_simulation(setup_for(small_params(3, 0)), [](NodeId) { return std::make_unique<Order>(); }, delay, adv);
  std::vector<std::string> bodies;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::kReceive) bodies.push_back(e.payload.substr(e.payload.size() - 1));
  }
  EXPECT_EQ(bodies, (std::vector<std::string>{"b", "z"}));
}

TEST(Simulator, RejectsTooManyCorruptedOrFastClocks) {
  FixedDelay delay(1);
  NullAdversary adv;
  EXPECT_THROW(Simulator(setup_for(small_params(), {0, 1}), pingers(), delay, adv), std::invalid_argument);
  SimulationSetup s = setup_for(small_params());
  s.clocks[0] = ClockSchedule::constant_rate(2);
  EXPECT_THROW(Simulator(s, pingers(), delay, adv), std::invalid_argument);
}

TEST(Simulator, MessageCanonicalForm) {
  EXPECT_EQ((Message{"tcb", 3, 1, {}, "x"}).canonical(), "tcb|3|1||x");
}

}  // namespace
}  // namespace pulsesync
