// Symbolic (Dolev-Yao style) signatures and the adversary's observation ledger.
//
// Tokens are plain values: nothing stops code from building a token that
// names an honest signer. Unforgeability is instead enforced where faulty
// messages enter the network: adversary_may_send() admits an honest token only
// if some faulty node had already received it.
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "pulsesync/core.hpp"

namespace pulsesync {

struct SignatureToken {
  NodeId signer = 0;
  std::string payload;
  /// Deterministic digest of (signer, payload); informational only.
  std::uint64_t unique_id = 0;

  friend bool operator==(const SignatureToken& a, const SignatureToken& b) {
    return a.signer == b.signer && a.payload == b.payload;
  }
  friend auto operator<=>(const SignatureToken& a, const SignatureToken& b) {
    if (auto c = a.signer <=> b.signer; c != 0) return c;
    return a.payload.compare(b.payload) <=> 0;
  }

  /// "sig(signer,payload)"
  std::string to_string() const;
};

/// Canonical payload: "<length>:<tag>|<round>|<value>", where length counts
/// the bytes after the colon.
std::string encode_payload(std::string_view tag, std::uint64_t round, std::string_view value);

SignatureToken sign(NodeId signer, std::string payload);

/// True iff token == sign(claimed_signer, payload).
bool verify(NodeId claimed_signer, const SignatureToken& token, std::string_view payload);

/// Earliest time at which any faulty node received each token.
class ObservationLedger {
 public:
  /// Keeps the earlier of the stored and the new time.
  void observe(const SignatureToken& token, const TimePoint& t);
  std::optional<TimePoint> first_observed(const SignatureToken& token) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<SignatureToken, TimePoint>& entries() const { return entries_; }

 private:
  std::map<SignatureToken, TimePoint> entries_;
};

/// True iff every embedded token signed by an honest node was observed by
/// some faulty node no later than send_time. Tokens of corrupted signers are
/// always admissible.
bool adversary_may_send(const ObservationLedger& ledger, std::span<const SignatureToken> tokens,
                        const TimePoint& send_time, const NodeSet& corrupted);

}  // namespace pulsesync
