// Byzantine strategies for CPS runs on the event simulator.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pulsesync/cps.hpp"
#include "pulsesync/des.hpp"

namespace pulsesync {

/// Wraps a behavior so it reads its clock as H(t) + shift.
class ShiftedBehavior final : public NodeBehavior {
 public:
  ShiftedBehavior(std::unique_ptr<NodeBehavior> inner, Rational shift)
      : inner_(std::move(inner)), shift_(std::move(shift)) {}
  void start(NodeContext& ctx) override;
  void on_message(NodeContext& ctx, NodeId from, const Message& msg) override;
  void on_timer(NodeContext& ctx, std::uint64_t tag) override;

 private:
  std::unique_ptr<NodeBehavior> inner_;
  Rational shift_;
};

class SilentAdversary final : public Adversary {};

/// Corrupted nodes run CPS (tolerant mode) on a clock shifted by `shift`.
class ConsistentLiar final : public Adversary {
 public:
  ConsistentLiar(const SystemParams& params, Rational shift) : params_(params), shift_(std::move(shift)) {}
  std::unique_ptr<NodeBehavior> puppet(NodeId) override;

 private:
  SystemParams params_;
  Rational shift_;
};

/// When a round starts (first honest dealer send seen), every corrupted node
/// sends its own round token to the honest nodes one after another, spaced
/// evenly over `spread`, at the fastest faulty-link delay.
class Equivocator final : public Adversary {
 public:
  Equivocator(const SystemParams& params, Rational spread) : params_(params), spread_(std::move(spread)) {}
  void on_honest_send(AdversaryContext& ctx, const SendRecord& send) override;
  void on_wakeup(AdversaryContext& ctx, std::uint64_t tag) override;

 private:
  SystemParams params_;
  Rational spread_;
  std::uint64_t last_round_ = 0;
  struct Pending {
    NodeId from;
    NodeId to;
    std::uint64_t round;
  };
  std::vector<Pending> pending_;
};

/// Pulls honest traffic into corrupted nodes as fast as allowed, relays every
/// direct dealer token to all honest nodes at the fastest faulty-link delay,
/// and sends its own token the moment it hears a round start.
class EchoRusher final : public Adversary {
 public:
  explicit EchoRusher(const SystemParams& params) : params_(params) {}
  std::optional<TimePoint> delay_to_faulty(const LinkSend&) override;
  void on_faulty_receive(AdversaryContext& ctx, NodeId at, NodeId from, const Message& msg) override;

 private:
  SystemParams params_;
  std::vector<std::uint64_t> own_sent_;
};

struct AdversaryKnobs {
  /// consistent_liar clock shift; default S/2.
  std::optional<Rational> shift;
  /// equivocator spacing; default S.
  std::optional<Rational> spread;
};

inline const std::vector<std::string>& des_adversary_names() {
  static const std::vector<std::string> names{"silent", "consistent_liar", "equivocator", "echo_rusher"};
  return names;
}

/// One of des_adversary_names(); std::invalid_argument otherwise.
std::unique_ptr<Adversary> make_des_adversary(const std::string& name, const SystemParams& params,
                                              const AdversaryKnobs& knobs = {});

}  // namespace pulsesync
