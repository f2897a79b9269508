// Byzantine strategies for the lock-step engine.
#pragma once

#include <map>
#include <memory>
#include <string>

#include "pulsesync/random.hpp"
#include "pulsesync/sync_engine.hpp"

namespace pulsesync {

/// Corrupted nodes send nothing; every honest node sees bottom for them.
class SyncSilent final : public SyncAdversary {
 public:
  std::vector<SyncMessage> act(const RoundView&) override { return {}; }
};

/// Each corrupted dealer picks one value per iteration and follows the
/// protocol with it; corrupted nodes echo like honest ones.
class SyncConsistentLiar final : public SyncAdversary {
 public:
  explicit SyncConsistentLiar(std::uint64_t seed) : rng_(seed) {}
  /// Always lie with `value` instead of a random one.
  explicit SyncConsistentLiar(Rational value) : rng_(0), fixed_(std::move(value)) {}

  std::vector<SyncMessage> act(const RoundView& view) override;

 private:
  Rng rng_;
  std::optional<Rational> fixed_;
};

/// Corrupted dealers sign two values and split the honest nodes between them.
/// In the echo round every corrupted node either relays the other value to a
/// random subset (cross-echo), producing a mix of bottoms and accepted values,
/// or, with cross_all, to every honest node, forcing bottom everywhere.
class SyncEquivocator final : public SyncAdversary {
 public:
  explicit SyncEquivocator(std::uint64_t seed, bool cross_all = false) : rng_(seed), cross_all_(cross_all) {}

  std::vector<SyncMessage> act(const RoundView& view) override;

 private:
  Rng rng_;
  bool cross_all_;
  // Per dealer, this iteration's two signed values.
  std::map<NodeId, std::pair<Rational, Rational>> split_;
};

/// Scripted: corrupted dealer x signs `value` and sends it only to
/// `recipients`; corrupted nodes never echo. An empty recipient set yields bottom everywhere.
class SyncSelectiveDealer final : public SyncAdversary {
 public:
  struct Script {
    Rational value;
    NodeSet recipients;
  };
  explicit SyncSelectiveDealer(std::map<NodeId, Script> scripts) : scripts_(std::move(scripts)) {}

  std::vector<SyncMessage> act(const RoundView& view) override;

 private:
  std::map<NodeId, Script> scripts_;
};

/// "silent", "consistent_liar", "equivocator". Throws std::invalid_argument otherwise.
std::unique_ptr<SyncAdversary> make_sync_adversary(const std::string& name, std::uint64_t seed);

}  // namespace pulsesync
