#include "pulsesync/lower_bound.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>

#include "pulsesync/cps.hpp"

namespace pulsesync {

namespace {

NodeId next(NodeId i, unsigned k) { return static_cast<NodeId>((i + k) % 3); }

std::string describe(const Injection& inj) {
  return "Ex" + std::to_string(inj.execution) + " " + std::to_string(inj.from) + "->" + std::to_string(inj.to) +
         " " + inj.msg.canonical();
}

}  // namespace

void FreeRunning::start(NodeContext& ctx) { ctx.set_timer(S_, 1); }

void FreeRunning::on_timer(NodeContext& ctx, std::uint64_t tag) {
  ctx.pulse(tag);
  ctx.set_timer(LocalTime(S_ + T_ * static_cast<long>(tag)), tag + 1);
}

BehaviorFactory make_free_running_factory(const Rational& S, const Rational& T) {
  return [S, T](NodeId) { return std::make_unique<FreeRunning>(S, T); };
}

BehaviorFactory make_inert_factory() {
  return [](NodeId) { return std::make_unique<Inert>(); };
}

BehaviorFactory make_attack_behavior(const std::string& name, const SystemParams& params) {
  if (name == "cps") return make_cps_factory(params, CpsOptions{false});
  if (name == "free_running") return make_free_running_factory(params.S, params.T);
  if (name == "inert") return make_inert_factory();
  throw std::invalid_argument("unknown attack behavior '" + name + "'");
}

Rational clock_breakpoint(const Rational& theta, const Rational& u_tilde) {
  return Rational(2 * u_tilde / (3 * (theta - 1)));
}

std::uint64_t attack_round(const Rational& u_tilde, const Rational& P_min, const Rational& theta) {
  if (P_min <= 0 || theta <= 1) throw std::invalid_argument("attack round needs P_min > 0 and theta > 1");
  const mpz_class r = ceil(Rational(u_tilde / (P_min * (theta - 1)))) + 1;
  return r.get_ui();
}

std::vector<ClockSchedule> attack_clocks(const SystemParams& p, NodeId a) {
  std::vector<ClockSchedule> clocks(3, ClockSchedule::identity());
  clocks[next(a, 2)] = ClockSchedule::fast_then_offset(p.theta, Rational(2 * p.u_tilde / 3));
  return clocks;
}

TimePoint attack_horizon(const SystemParams& p, std::uint64_t pulses) {
  return TimePoint(p.S + (p.T + 3 * p.S) * static_cast<long>(pulses + 1) + p.d);
}

ExecutionTriple build_execution_triple(const BehaviorFactory& behavior, const SystemParams& params,
                                       const TimePoint& horizon) {
  if (params.n != 3) throw std::invalid_argument("the attack runs at n = 3");
  if (params.f < 1) throw std::invalid_argument("the attack needs f >= 1");
  if (params.u_tilde >= params.d || 3 * params.d <= 2 * params.u_tilde) {
    throw std::invalid_argument("the attack needs u_tilde < d");
  }
  const Rational fast_delay = params.d - params.u_tilde;
  const Rational lead = 2 * params.u_tilde / 3;

  ExecutionTriple triple;
  triple.params = params;
  triple.requested_u_tilde = params.u_tilde;
  triple.horizon = horizon;

  ClassDelay delays(params.d, fast_delay);
  NullAdversary quiet;
  std::array<std::unique_ptr<Simulator>, 3> sims;
  for (NodeId a = 0; a < 3; ++a) {
    SimulationSetup setup;
    setup.params = params;
    setup.clocks = attack_clocks(params, a);
    setup.corrupted = {a};
    setup.horizon = horizon;
    setup.self_delivery = SelfDelivery::kLocalDelay;
    sims[a] = std::make_unique<Simulator>(setup, behavior, delays, quiet);
  }

  // Honest x -> honest y in execution e becomes faulty x -> y in execution x,
  // arriving at the same local time at y.
  for (NodeId e = 0; e < 3; ++e) {
    sims[e]->set_send_observer([&, e](const SendRecord& s) {
      if (s.from == s.to || s.to == e) return;
      const NodeId x = s.from, y = s.to;
      Simulator& target = *sims[x];
      const LocalTime h = sims[e]->setup().clocks[y].at(s.arrival_time);
      const TimePoint arrival = target.setup().clocks[y].inverse(h);
      const TimePoint send_time = arrival - fast_delay;
      triple.injections.push_back(Injection{x, x, y, s.msg, send_time, arrival, h});
      target.schedule_faulty_send(x, y, s.msg, send_time, fast_delay);
    });
  }
  for (auto& s : sims) s->start();

  // Advance all three in global time order; ties go to the lowest index.
  for (;;) {
    std::size_t pick = 3;
    std::optional<TimePoint> best;
    for (std::size_t a = 0; a < 3; ++a) {
      const auto t = sims[a]->next_event_time();
      if (t && (!best || *t < *best)) {
        best = t;
        pick = a;
      }
    }
    if (pick == 3) break;
    sims[pick]->step();
  }

  // Availability: everything an injection carries was seen by its sender no
  // later than local arrival - d + u_tilde/3, and it leaves no earlier.
  for (const Injection& inj : triple.injections) {
    if (inj.send_time > horizon) continue;
    ++triple.faulty_messages;
    const Rational bound = inj.local_arrival - params.d + params.u_tilde / 3;
    if (inj.send_time < bound) {
      triple.audit_failures.push_back("early send " + format_rational(inj.send_time) + " < " + format_rational(bound) +
                                      ": " + describe(inj));
    }
    for (const auto& token : inj.msg.tokens) {
      if (token.signer == inj.from) continue;
      const auto seen = sims[inj.execution]->ledger().first_observed(token);
      if (!seen || *seen > bound) {
        triple.audit_failures.push_back("token " + token.to_string() + " not available by " + format_rational(bound) +
                                        ": " + describe(inj));
      }
    }
  }

  for (NodeId a = 0; a < 3; ++a) {
    ExecutionTrace& tr = triple.executions[a];
    tr = sims[a]->take_trace();
    if (tr.clocks[next(a, 1)] != ClockSchedule::identity() ||
        tr.clocks[next(a, 2)] != ClockSchedule::fast_then_offset(params.theta, lead)) {
      triple.audit_failures.push_back("Ex" + std::to_string(a) + ": clock assignment");
    }
    std::set<std::pair<NodeId, LocalTime>> seen_receive;
    for (const TraceEvent& ev : tr.events) {
      if (ev.kind != EventKind::kReceive) continue;
      if (!seen_receive.insert({ev.to, ev.local_time}).second) ++triple.receive_ties;
      Rational delay = ev.t - *ev.sent_at;
      Rational expected = params.d;
      if (ev.from == ev.to) {
        delay = ev.local_time - tr.clocks[ev.to].at(*ev.sent_at);
      } else if (ev.from == a || ev.to == a) {
        expected = fast_delay;
      }
      if (delay != expected) {
        triple.audit_failures.push_back("Ex" + std::to_string(a) + ": delay " + format_rational(delay) + " on " +
                                        std::to_string(ev.from) + "->" + std::to_string(ev.to) + " at " +
                                        format_rational(ev.t));
      }
    }
  }

  std::string mismatch;
  for (NodeId i = 0; i < 3; ++i) {
    const ExecutionTrace& fast = triple.executions[next(i, 1)];
    const ExecutionTrace& slow = triple.executions[next(i, 2)];
    const LocalTime L = min(fast.clocks[i].at(horizon), slow.clocks[i].at(horizon));
    triple.view_horizon[i] = L;
    auto cut = [&](std::vector<LocalEntry> v) {
      v.erase(std::find_if(v.begin(), v.end(), [&](const LocalEntry& e) { return e.local_time > L; }), v.end());
      return v;
    };
    const auto a = cut(local_view(fast, i));
    const auto b = cut(local_view(slow, i));
    triple.views_equal[i] = a == b;
    if (!triple.views_equal[i]) {
      std::size_t k = 0;
      while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
      const auto at = [&](const std::vector<LocalEntry>& v) {
        return k < v.size() ? format_rational(v[k].local_time) + " " + v[k].payload : std::string("<end>");
      };
      mismatch += " node " + std::to_string(i) + " entry " + std::to_string(k) + " (" + at(a) + " vs " + at(b) + ")";
    }
  }
  if (!mismatch.empty()) {
    throw AttackAborted("executions distinguishable:" + mismatch + "; " + std::to_string(triple.receive_ties) +
                        " same-local-time receives",
                        triple.receive_ties);
  }
  return triple;
}

ExecutionTriple build_execution_triple_with_retry(const BehaviorFactory& behavior, const SystemParams& params,
                                                  const TimePoint& horizon, std::size_t max_retries) {
  SystemParams p = params;
  Rational step = params.u_tilde / 997;
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      ExecutionTriple t = build_execution_triple(behavior, p, horizon);
      t.requested_u_tilde = params.u_tilde;
      t.retries = attempt;
      return t;
    } catch (const AttackAborted& e) {
      if (e.receive_ties == 0 || attempt >= max_retries || params.u_tilde == 0) throw;
      p.u_tilde = params.u_tilde + step;
      step /= 997;
    }
  }
}

LowerBoundReport verify_lower_bound(const ExecutionTriple& triple, std::uint64_t round) {
  const SystemParams& p = triple.params;
  LowerBoundReport r;
  r.round = round;
  r.breakpoint = clock_breakpoint(p.theta, p.u_tilde);
  const Rational lead = 2 * p.u_tilde / 3;
  r.after_breakpoint = true;
  for (NodeId a = 0; a < 3; ++a) {
    for (unsigned k = 1; k <= 2; ++k) {
      const NodeId v = next(a, k);
      r.pulses[a][v] = triple.executions[a].pulse_time(v, round);
      if (!r.pulses[a][v]) {
        throw std::runtime_error("horizon too short: node " + std::to_string(v) + " never emitted pulse " +
                                 std::to_string(round) + " in execution " + std::to_string(a));
      }
      if (*r.pulses[a][v] < r.breakpoint) r.after_breakpoint = false;
    }
  }
  r.sum = 0;
  r.max_skew = 0;
  for (NodeId a = 0; a < 3; ++a) {
    r.skews[a] = *r.pulses[a][next(a, 1)] - *r.pulses[a][next(a, 2)];
    r.sum += r.skews[a];
    const Rational mag = r.skews[a] < 0 ? Rational(-r.skews[a]) : r.skews[a];
    r.max_skew = max(r.max_skew, mag);
  }
  r.shift_identity_ok = true;
  for (NodeId i = 0; i < 3; ++i) {
    if (*r.pulses[next(i, 1)][i] != *r.pulses[next(i, 2)][i] - lead) r.shift_identity_ok = false;
  }
  r.sum_identity_ok = r.sum == 2 * p.u_tilde;
  r.bound_ok = r.max_skew >= lead;
  r.indistinguishability_ok = triple.indistinguishable();
  r.audits_ok = triple.audits_ok();
  return r;
}

nlohmann::ordered_json to_json(const LowerBoundReport& r, const ExecutionTriple& t) {
  auto q = [](const Rational& x) { return format_rational(x); };
  nlohmann::ordered_json j;
  const SystemParams& p = t.params;
  j["params"] = {{"n", p.n}, {"f", p.f},           {"d", q(p.d)}, {"u", q(p.u)}, {"u_tilde", q(p.u_tilde)},
                 {"theta", q(p.theta)}, {"S", q(p.S)}, {"T", q(p.T)}, {"delta", q(p.delta)}};
  j["requested_u_tilde"] = q(t.requested_u_tilde);
  j["retries"] = t.retries;
  j["horizon"] = q(t.horizon);
  j["r*"] = r.round;
  j["breakpoint"] = q(r.breakpoint);
  j["after_breakpoint"] = r.after_breakpoint;
  j["pulse_times"] = nlohmann::ordered_json::array();
  for (NodeId a = 0; a < 3; ++a) {
    nlohmann::ordered_json ex;
    ex["execution"] = a;
    ex["faulty"] = a;
    for (NodeId v = 0; v < 3; ++v) {
      ex["p" + std::to_string(v)] = r.pulses[a][v] ? nlohmann::ordered_json(q(*r.pulses[a][v])) : nlohmann::ordered_json(nullptr);
    }
    ex["skew"] = q(r.skews[a]);
    j["pulse_times"].push_back(std::move(ex));
  }
  j["skews"] = {q(r.skews[0]), q(r.skews[1]), q(r.skews[2])};
  j["sum"] = q(r.sum);
  j["max_skew"] = q(r.max_skew);
  j["bound"] = q(Rational(2 * p.u_tilde / 3));
  j["sum_identity_ok"] = r.sum_identity_ok;
  j["shift_identity_ok"] = r.shift_identity_ok;
  j["bound_ok"] = r.bound_ok;
  j["indistinguishability_ok"] = r.indistinguishability_ok;
  j["faulty_messages"] = t.faulty_messages;
  j["receive_ties"] = t.receive_ties;
  j["audits_ok"] = r.audits_ok;
  j["audit_failures"] = t.audit_failures;
  return j;
}

}  // namespace pulsesync
