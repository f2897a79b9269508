// Lock-step synchronous execution of crusader broadcast and approximate
// agreement, against a rushing adversary.
#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "pulsesync/core.hpp"
#include "pulsesync/signatures.hpp"

namespace pulsesync {

/// One point-to-point message of a crusader broadcast instance. The instance
/// is identified by its dealer; `token` should sign cb_payload(iteration, value).
struct SyncMessage {
  NodeId from = 0;
  NodeId to = 0;
  NodeId dealer = 0;
  Rational value;
  std::optional<SignatureToken> token;

  friend bool operator==(const SyncMessage&, const SyncMessage&) = default;
};

/// Payload a dealer signs for `value` in APA iteration `iteration`.
std::string cb_payload(std::uint64_t iteration, const Rational& value);

enum class CbPhase { kDealer = 1, kEcho = 2 };

/// Everything the adversary sees before choosing the faulty messages of a
/// round: the honest messages of this very round (rushing) and all earlier traffic.
struct RoundView {
  std::uint64_t round = 0;
  std::uint64_t iteration = 0;
  CbPhase phase = CbPhase::kDealer;
  std::size_t n = 0;
  std::size_t f = 0;
  const NodeSet& corrupted;
  const std::map<NodeId, Rational>& honest_inputs;
  std::span<const SyncMessage> honest_messages;
  std::span<const SyncMessage> history;
};

class SyncAdversary {
 public:
  virtual ~SyncAdversary() = default;
  /// Messages sent by corrupted nodes this round. Every honest-signed token in
  /// them must already have reached a corrupted node.
  virtual std::vector<SyncMessage> act(const RoundView& view) = 0;
};

/// Output of one crusader broadcast at one node; nullopt is the bottom marker.
using CbOutput = std::optional<Rational>;

struct CrusaderOutcome {
  /// Honest nodes only.
  std::map<NodeId, CbOutput> outputs;
};

struct Interval {
  Rational lo;
  Rational hi;

  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  Rational midpoint() const { return Rational((lo + hi) / 2); }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Interval spanned by the received values after discarding the lowest and the
/// highest f - b, where b counts the bottoms. `received` is indexed by dealer.
/// Sorting is by (value, dealer). Throws ModelViolation if b > f or nothing remains.
Interval apa_retained_interval(std::span<const CbOutput> received, std::size_t f);

/// Per-round, per-node log record.
struct SyncRoundRecord {
  std::uint64_t round = 0;
  NodeId node = 0;
  std::vector<SyncMessage> sent;
  std::vector<SyncMessage> received;
  std::optional<Rational> output;
};

/// Shared state of consecutive synchronous rounds: node set, adversary,
/// round counter and the ledger gating faulty messages.
class SyncNetwork {
 public:
  SyncNetwork(std::size_t n, std::size_t f, NodeSet corrupted, SyncAdversary& adversary);

  /// Runs the n crusader broadcast instances of one APA iteration in two
  /// rounds. Honest dealers broadcast their entry of `honest_values`; corrupted
  /// dealers act through the adversary. Result: [owner][dealer] for honest owners.
  std::map<NodeId, std::vector<CbOutput>> crusader_exchange(const std::map<NodeId, Rational>& honest_values,
                                                            std::uint64_t iteration);

  std::size_t n() const { return n_; }
  std::size_t f() const { return f_; }
  const NodeSet& corrupted() const { return corrupted_; }
  std::uint64_t rounds_run() const { return round_; }
  const ObservationLedger& ledger() const { return ledger_; }
  const std::vector<SyncRoundRecord>& records() const { return records_; }
  void record_outputs(const std::map<NodeId, Rational>& outputs);

 private:
  std::vector<SyncMessage> run_round(CbPhase phase, std::uint64_t iteration,
                                     const std::map<NodeId, Rational>& honest_values,
                                     std::vector<SyncMessage> honest_messages);

  std::size_t n_;
  std::size_t f_;
  NodeSet corrupted_;
  SyncAdversary& adversary_;
  std::uint64_t round_ = 0;
  ObservationLedger ledger_;
  std::vector<SyncMessage> history_;
  std::vector<SyncRoundRecord> records_;
};

/// Single crusader broadcast from `dealer`. `input` is ignored for a corrupted dealer.
CrusaderOutcome run_cb(std::size_t n, std::size_t f, NodeId dealer, const Rational& input,
                       const NodeSet& corrupted, SyncAdversary& adversary);

struct ApaIterationResult {
  std::map<NodeId, Rational> outputs;
  std::map<NodeId, Interval> intervals;
  std::map<NodeId, std::size_t> bottoms;
  std::map<NodeId, std::vector<CbOutput>> received;
};

/// One two-round APA iteration on `network`: every honest node broadcasts its
/// input, trims, and outputs the midpoint of its retained interval.
ApaIterationResult run_apa_iteration(SyncNetwork& network, const std::map<NodeId, Rational>& inputs,
                                     std::uint64_t iteration = 0);

/// Convenience overload with a fresh network.
ApaIterationResult run_apa_iteration(std::size_t n, std::size_t f, const std::map<NodeId, Rational>& inputs,
                                     const NodeSet& corrupted, SyncAdversary& adversary);

/// Smallest k >= 0 with spread / 2^k <= epsilon.
std::size_t apa_iteration_count(const Rational& spread, const Rational& epsilon);

struct ApaRun {
  /// values[0] are the inputs, values[k] the outputs of iteration k.
  std::vector<std::map<NodeId, Rational>> values;
  std::vector<ApaIterationResult> iterations;
  std::size_t rounds = 0;
  std::vector<SyncRoundRecord> records;

  const std::map<NodeId, Rational>& outputs() const { return values.back(); }
};

/// Repeats APA ceil(log2(spread/epsilon)) times. Requires epsilon > 0.
ApaRun run_apa(std::size_t n, std::size_t f, const std::map<NodeId, Rational>& inputs, const Rational& spread,
               const Rational& epsilon, const NodeSet& corrupted, SyncAdversary& adversary);

/// max - min over the map's values (0 when empty).
Rational spread_of(const std::map<NodeId, Rational>& values);

/// One JSON object per line: {round, node, sent, received, output}.
void write_apa_jsonl(const std::vector<SyncRoundRecord>& records, std::ostream& out);

}  // namespace pulsesync
