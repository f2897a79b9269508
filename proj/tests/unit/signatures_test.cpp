#include <gtest/gtest.h>

#include "pulsesync/signatures.hpp"

namespace pulsesync {
namespace {

TEST(Signatures, SigningIsDeterministicAndBindsSignerAndPayload) {
  EXPECT_EQ(sign(1, "r=3"), sign(1, "r=3"));
  EXPECT_EQ(sign(1, "r=3").unique_id, sign(1, "r=3").unique_id);
  EXPECT_NE(sign(1, "r=3"), sign(2, "r=3"));
  EXPECT_NE(sign(1, "r=3"), sign(1, "r=4"));
}

TEST(Signatures, Verify) {
  EXPECT_TRUE(verify(1, sign(1, "x"), "x"));
  EXPECT_FALSE(verify(2, sign(1, "x"), "x"));
  EXPECT_FALSE(verify(1, sign(1, "x"), "y"));
}

TEST(Signatures, PayloadEncodingIsLengthPrefixed) {
  EXPECT_EQ(encode_payload("cb", 3, "1/2"), "8:cb|3|1/2");
  EXPECT_NE(encode_payload("cb", 3, "1/2"), encode_payload("cb", 3, "1/20"));
}

TEST(Ledger, KeepsEarliestObservation) {
  ObservationLedger ledger;
  const auto tok = sign(0, "p");
  ledger.observe(tok, 7);
  ledger.observe(tok, 5);
  ledger.observe(tok, 9);
  EXPECT_EQ(ledger.first_observed(tok), Rational(5));
  EXPECT_FALSE(ledger.first_observed(sign(0, "q")).has_value());
  EXPECT_EQ(ledger.size(), 1u);
}

TEST(Gate, FaultySignedTokensAlwaysPass) {
  const ObservationLedger empty;
  const std::vector<SignatureToken> toks{sign(2, "a"), sign(2, "b")};
  EXPECT_TRUE(adversary_may_send(empty, toks, 0, NodeSet{2}));
}

TEST(Gate, HonestTokenNeedsPriorObservation) {
  ObservationLedger ledger;
  const auto tok = sign(0, "p");
  ledger.observe(tok, 5);
  const std::vector<SignatureToken> toks{tok};
  EXPECT_FALSE(adversary_may_send(ledger, toks, 4, NodeSet{2}));
  EXPECT_TRUE(adversary_may_send(ledger, toks, 5, NodeSet{2}));
  EXPECT_FALSE(adversary_may_send(ObservationLedger{}, toks, 100, NodeSet{2}));
}

}  // namespace
}  // namespace pulsesync
