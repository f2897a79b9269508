#include "pulsesync/signatures.hpp"

#include <algorithm>

namespace pulsesync {

namespace {

// FNV-1a, 64 bit.
std::uint64_t digest(NodeId signer, std::string_view payload) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (int i = 0; i < 4; ++i) mix(static_cast<unsigned char>((signer >> (8 * i)) & 0xff));
  mix('|');
  for (char c : payload) mix(static_cast<unsigned char>(c));
  return h;
}

}  // namespace

std::string SignatureToken::to_string() const {
  return "sig(" + std::to_string(signer) + "," + payload + ")";
}

std::string encode_payload(std::string_view tag, std::uint64_t round, std::string_view value) {
  std::string body;
  body.reserve(tag.size() + value.size() + 24);
  body.append(tag);
  body.push_back('|');
  body.append(std::to_string(round));
  body.push_back('|');
  body.append(value);
  return std::to_string(body.size()) + ":" + body;
}

SignatureToken sign(NodeId signer, std::string payload) {
  const std::uint64_t id = digest(signer, payload);
  return SignatureToken{signer, std::move(payload), id};
}

bool verify(NodeId claimed_signer, const SignatureToken& token, std::string_view payload) {
  return token.signer == claimed_signer && token.payload == payload;
}

void ObservationLedger::observe(const SignatureToken& token, const TimePoint& t) {
  auto [it, inserted] = entries_.try_emplace(token, t);
  if (!inserted && t < it->second) it->second = t;
}

std::optional<TimePoint> ObservationLedger::first_observed(const SignatureToken& token) const {
  if (auto it = entries_.find(token); it != entries_.end()) return it->second;
  return std::nullopt;
}

bool adversary_may_send(const ObservationLedger& ledger, std::span<const SignatureToken> tokens,
                        const TimePoint& send_time, const NodeSet& corrupted) {
  return std::all_of(tokens.begin(), tokens.end(), [&](const SignatureToken& token) {
    if (corrupted.contains(token.signer)) return true;
    const auto seen = ledger.first_observed(token);
    return seen.has_value() && *seen <= send_time;
  });
}

}  // namespace pulsesync
