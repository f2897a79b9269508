#include "pulsesync/sync_engine.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace pulsesync {

std::string cb_payload(std::uint64_t iteration, const Rational& value) {
  return encode_payload("cb", iteration, format_rational(value));
}

Interval apa_retained_interval(std::span<const CbOutput> received, std::size_t f) {
  std::vector<std::pair<Rational, NodeId>> values;
  std::size_t bottoms = 0;
  for (std::size_t dealer = 0; dealer < received.size(); ++dealer) {
    if (received[dealer]) {
      values.emplace_back(*received[dealer], static_cast<NodeId>(dealer));
    } else {
      ++bottoms;
    }
  }
  if (bottoms > f) {
    throw ModelViolation("apa: " + std::to_string(bottoms) + " bottoms exceed fault budget " + std::to_string(f));
  }
  std::sort(values.begin(), values.end());
  const std::size_t drop = f - bottoms;
  if (values.size() <= 2 * drop) throw ModelViolation("apa: no value survives trimming");
  return Interval{values[drop].first, values[values.size() - 1 - drop].first};
}

SyncNetwork::SyncNetwork(std::size_t n, std::size_t f, NodeSet corrupted, SyncAdversary& adversary)
    : n_(n), f_(f), corrupted_(std::move(corrupted)), adversary_(adversary) {
  if (n_ < 2) throw std::invalid_argument("sync network needs n >= 2");
  if (corrupted_.size() > f_) throw std::invalid_argument("more corrupted nodes than the fault budget");
  for (NodeId v : corrupted_) {
    if (v >= n_) throw std::invalid_argument("corrupted id out of range");
  }
}

std::vector<SyncMessage> SyncNetwork::run_round(CbPhase phase, std::uint64_t iteration,
                                                const std::map<NodeId, Rational>& honest_values,
                                                std::vector<SyncMessage> honest_messages) {
  const TimePoint now(static_cast<long>(round_));

  // Rushing: faulty recipients see this round's honest traffic before acting.
  for (const auto& m : honest_messages) {
    if (corrupted_.contains(m.to) && m.token) ledger_.observe(*m.token, now);
  }

  RoundView view{round_, iteration, phase, n_, f_, corrupted_, honest_values, honest_messages, history_};
  std::vector<SyncMessage> faulty = adversary_.act(view);
  for (const auto& m : faulty) {
    if (!corrupted_.contains(m.from)) {
      throw ModelViolation("adversary sent on behalf of honest node " + std::to_string(m.from));
    }
    if (m.to >= n_ || m.dealer >= n_) throw ModelViolation("adversary addressed a node out of range");
    if (m.token) {
      const SignatureToken& t = *m.token;
      if (!adversary_may_send(ledger_, std::span(&t, 1), now, corrupted_)) {
        throw ModelViolation("unforgeability: " + t.to_string() + " not observed by round " +
                             std::to_string(round_));
      }
      if (corrupted_.contains(m.to)) ledger_.observe(t, now);
    }
  }

  std::vector<SyncMessage> all = std::move(honest_messages);
  all.insert(all.end(), faulty.begin(), faulty.end());

  for (NodeId v = 0; v < n_; ++v) {
    SyncRoundRecord rec;
    rec.round = round_;
    rec.node = v;
    for (const auto& m : all) {
      if (m.from == v) rec.sent.push_back(m);
      if (m.to == v) rec.received.push_back(m);
    }
    records_.push_back(std::move(rec));
  }
  history_.insert(history_.end(), all.begin(), all.end());
  ++round_;
  return all;
}

std::map<NodeId, std::vector<CbOutput>> SyncNetwork::crusader_exchange(
    const std::map<NodeId, Rational>& honest_values, std::uint64_t iteration) {
  // Round 1: honest dealers sign and send their value to everyone, themselves included.
  std::vector<SyncMessage> dealt;
  for (const auto& [v, value] : honest_values) {
    if (corrupted_.contains(v)) throw std::invalid_argument("honest value supplied for a corrupted node");
    const SignatureToken token = sign(v, cb_payload(iteration, value));
    for (NodeId w = 0; w < n_; ++w) dealt.push_back(SyncMessage{v, w, v, value, token});
  }
  const std::vector<SyncMessage> round1 = run_round(CbPhase::kDealer, iteration, honest_values, std::move(dealt));

  // direct[w][x]: first message node w got from dealer x about its own instance.
  std::vector<std::vector<const SyncMessage*>> direct(n_, std::vector<const SyncMessage*>(n_, nullptr));
  for (const auto& m : round1) {
    if (m.from == m.dealer && direct[m.to][m.dealer] == nullptr) direct[m.to][m.dealer] = &m;
  }

  // Round 2: honest nodes echo whatever the dealer gave them.
  std::vector<SyncMessage> echoes;
  for (NodeId w = 0; w < n_; ++w) {
    if (corrupted_.contains(w)) continue;
    for (NodeId x = 0; x < n_; ++x) {
      const SyncMessage* got = direct[w][x];
      if (got == nullptr) continue;
      for (NodeId y = 0; y < n_; ++y) echoes.push_back(SyncMessage{w, y, x, got->value, got->token});
    }
  }
  const std::vector<SyncMessage> round2 = run_round(CbPhase::kEcho, iteration, honest_values, std::move(echoes));

  std::map<NodeId, std::vector<CbOutput>> result;
  for (NodeId w = 0; w < n_; ++w) {
    if (corrupted_.contains(w)) continue;
    std::vector<CbOutput>& out = result[w];
    out.assign(n_, std::nullopt);
    for (NodeId x = 0; x < n_; ++x) {
      const SyncMessage* d = direct[w][x];
      auto valid = [&](const SyncMessage& m) {
        return m.token && verify(x, *m.token, cb_payload(iteration, m.value));
      };
      if (d == nullptr || !valid(*d)) continue;
      bool conflict = false;
      for (const auto& m : round2) {
        if (m.to == w && m.dealer == x && valid(m) && m.value != d->value) {
          conflict = true;
          break;
        }
      }
      if (!conflict) out[x] = d->value;
    }
  }
  return result;
}

void SyncNetwork::record_outputs(const std::map<NodeId, Rational>& outputs) {
  for (auto it = records_.rbegin(); it != records_.rend() && it->round + 1 == round_; ++it) {
    if (auto o = outputs.find(it->node); o != outputs.end()) it->output = o->second;
  }
}

CrusaderOutcome run_cb(std::size_t n, std::size_t f, NodeId dealer, const Rational& input,
                       const NodeSet& corrupted, SyncAdversary& adversary) {
  if (dealer >= n) throw std::invalid_argument("dealer out of range");
  SyncNetwork net(n, f, corrupted, adversary);
  std::map<NodeId, Rational> values;
  if (!corrupted.contains(dealer)) values.emplace(dealer, input);
  CrusaderOutcome outcome;
  for (auto& [w, row] : net.crusader_exchange(values, 0)) outcome.outputs[w] = row[dealer];
  return outcome;
}

ApaIterationResult run_apa_iteration(SyncNetwork& network, const std::map<NodeId, Rational>& inputs,
                                     std::uint64_t iteration) {
  for (NodeId v = 0; v < network.n(); ++v) {
    if (!network.corrupted().contains(v) && !inputs.contains(v)) {
      throw std::invalid_argument("missing input for honest node " + std::to_string(v));
    }
  }
  ApaIterationResult result;
  result.received = network.crusader_exchange(inputs, iteration);
  for (const auto& [v, row] : result.received) {
    const Interval I = apa_retained_interval(row, network.f());
    result.bottoms[v] = static_cast<std::size_t>(std::count(row.begin(), row.end(), std::nullopt));
    result.intervals[v] = I;
    result.outputs[v] = I.midpoint();
  }
  network.record_outputs(result.outputs);
  return result;
}

ApaIterationResult run_apa_iteration(std::size_t n, std::size_t f, const std::map<NodeId, Rational>& inputs,
                                     const NodeSet& corrupted, SyncAdversary& adversary) {
  SyncNetwork net(n, f, corrupted, adversary);
  return run_apa_iteration(net, inputs, 0);
}

std::size_t apa_iteration_count(const Rational& spread, const Rational& epsilon) {
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  std::size_t k = 0;
  Rational reach = epsilon;
  while (spread > reach) {
    reach *= 2;
    ++k;
  }
  return k;
}

ApaRun run_apa(std::size_t n, std::size_t f, const std::map<NodeId, Rational>& inputs, const Rational& spread,
               const Rational& epsilon, const NodeSet& corrupted, SyncAdversary& adversary) {
  if (spread_of(inputs) > spread) throw std::invalid_argument("honest inputs exceed the stated spread bound");
  const std::size_t iterations = apa_iteration_count(spread, epsilon);
  SyncNetwork net(n, f, corrupted, adversary);
  ApaRun run;
  run.values.push_back(inputs);
  for (std::size_t k = 0; k < iterations; ++k) {
    run.iterations.push_back(run_apa_iteration(net, run.values.back(), k));
    run.values.push_back(run.iterations.back().outputs);
  }
  run.rounds = net.rounds_run();
  run.records = net.records();
  return run;
}

Rational spread_of(const std::map<NodeId, Rational>& values) {
  if (values.empty()) return Rational(0);
  auto [lo, hi] = std::minmax_element(values.begin(), values.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
  return Rational(hi->second - lo->second);
}

namespace {

nlohmann::ordered_json to_json(const SyncMessage& m) {
  nlohmann::ordered_json j;
  j["from"] = m.from;
  j["to"] = m.to;
  j["dealer"] = m.dealer;
  j["value"] = format_rational(m.value);
  j["token"] = m.token ? nlohmann::ordered_json(m.token->to_string()) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace

void write_apa_jsonl(const std::vector<SyncRoundRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["round"] = r.round;
    j["node"] = r.node;
    j["sent"] = nlohmann::ordered_json::array();
    for (const auto& m : r.sent) j["sent"].push_back(to_json(m));
    j["received"] = nlohmann::ordered_json::array();
    for (const auto& m : r.received) j["received"].push_back(to_json(m));
    j["output"] = r.output ? nlohmann::ordered_json(format_rational(*r.output)) : nlohmann::ordered_json(nullptr);
    out << j.dump() << '\n';
  }
}

}  // namespace pulsesync
