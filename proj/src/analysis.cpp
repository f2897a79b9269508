#include "pulsesync/analysis.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "pulsesync/cps.hpp"

namespace pulsesync {

Rational feasibility_polynomial(const Rational& theta) {
  const Rational t2 = theta * theta;
  return Rational(4 - theta + t2 - 3 * t2 * theta);
}

SystemParams ParameterSolution::params(std::size_t n, std::size_t f) const {
  return SystemParams{n, f, d, u, u_tilde, theta, S, T, delta};
}

ParameterSolution solve_parameters(const Rational& d, const Rational& u, const Rational& theta,
                                   std::optional<Rational> u_tilde, const Rational& t_scale) {
  const Rational ut = u_tilde.value_or(u);
  if (d <= 0) throw std::invalid_argument("d must be positive");
  if (u < 0 || u > d) throw std::invalid_argument("u must lie in [0, d]");
  if (ut < u || ut > d) throw std::invalid_argument("u_tilde must lie in [u, d]");
  if (theta <= 1) throw std::invalid_argument("theta must exceed 1");
  if (t_scale < 1) throw std::invalid_argument("T scale must be at least 1");

  ParameterSolution s;
  s.d = d;
  s.u = u;
  s.u_tilde = ut;
  s.theta = theta;

  const Rational t2 = theta * theta;
  const Rational t3 = t2 * theta;
  const Rational k = t2 + theta + 1;
  const Rational base_error = 2 * u + (t2 - 1) * d;  // delta at S = 0
  const Rational A = 2 * (2 * theta - 1) * base_error;
  const Rational B = (theta + 1) * d - 2 * u;

  s.polynomial = feasibility_polynomial(theta);
  s.feasible = s.polynomial > 0;
  s.skew_coefficient = 2 - theta - 4 * (2 * theta - 1) * t2 * (theta - 1);
  s.joint_coefficient = s.skew_coefficient - 2 * (t3 - 1);
  s.consistent = s.skew_coefficient > 0 && s.joint_coefficient > 0;

  if (s.feasible) s.T_closed_form = k * A / s.polynomial + B;
  if (s.consistent) s.T_joint = (k * A + B * s.skew_coefficient) / s.joint_coefficient;

  Rational T_min = 0;
  if (s.feasible) T_min = s.T_closed_form;
  if (s.consistent) T_min = max(T_min, s.T_joint);
  s.T = T_min * t_scale;

  if (s.skew_coefficient > 0) s.S = (A + 2 * (theta - 1) * s.T) / s.skew_coefficient;
  s.delta = measurement_error_bound(theta, d, u, s.S);
  s.P_min = (s.T - (theta + 1) * s.S) / theta;
  s.P_max = s.T + 3 * s.S;

  const Rational statement_den = 4 - 2 * theta - t2;
  if (statement_den != 0) {
    s.S_statement = (2 * (2 * theta - 1) * (u + (theta - 1) * d) + 2 * (theta - 1) * s.T) / statement_den;
  }
  const Rational proof_den = 2 - theta + t2 - t3;
  if (proof_den != 0) s.S_proof = (A + 2 * (theta - 1) * s.T) / proof_den;

  if (!s.feasible) s.binding.push_back("polynomial");
  if (s.skew_coefficient <= 0) s.binding.push_back("lemma8");
  if (!s.consistent) s.binding.push_back("joint");
  if (s.usable()) {
    s.binding.push_back(s.T_joint >= s.T_closed_form ? "corollary4" : "closed_form");
    s.binding.push_back("lemma8");
  }
  return s;
}

nlohmann::ordered_json to_json(const ParameterSolution& s) {
  nlohmann::ordered_json j;
  auto q = [](const Rational& x) { return format_rational(x); };
  j["d"] = q(s.d);
  j["u"] = q(s.u);
  j["u_tilde"] = q(s.u_tilde);
  j["theta"] = q(s.theta);
  j["polynomial"] = q(s.polynomial);
  j["feasible"] = s.feasible;
  j["skew_coefficient"] = q(s.skew_coefficient);
  j["joint_coefficient"] = q(s.joint_coefficient);
  j["consistent"] = s.consistent;
  j["T_closed_form"] = q(s.T_closed_form);
  j["T_joint"] = q(s.T_joint);
  j["T"] = q(s.T);
  j["S"] = q(s.S);
  j["delta"] = q(s.delta);
  j["P_min"] = q(s.P_min);
  j["P_max"] = q(s.P_max);
  j["S_statement"] = q(s.S_statement);
  j["S_proof"] = q(s.S_proof);
  j["binding"] = s.binding;
  return j;
}

// ---------------------------------------------------------------------------

void CheckResult::observe(const Rational& slack, bool strict, Witness w) {
  ++evaluated;
  if (!margin || slack < *margin) margin = slack;
  const bool ok = strict ? slack > 0 : slack >= 0;
  if (!ok) {
    passed = false;
    if (witnesses.size() < 8) witnesses.push_back(std::move(w));
  }
}

bool ConformanceReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* ConformanceReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ConformanceReport& ConformanceReport::merge(const ConformanceReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  if (other.max_skew) max_skew = max_skew ? max(*max_skew, *other.max_skew) : *other.max_skew;
  if (other.min_period) min_period = min_period ? min(*min_period, *other.min_period) : *other.min_period;
  if (other.max_period) max_period = max_period ? max(*max_period, *other.max_period) : *other.max_period;
  return *this;
}

nlohmann::ordered_json to_json(const ConformanceReport& r) {
  nlohmann::ordered_json j;
  j["passed"] = r.passed();
  auto opt = [](const std::optional<Rational>& x) {
    return x ? nlohmann::ordered_json(format_rational(*x)) : nlohmann::ordered_json(nullptr);
  };
  j["max_skew"] = opt(r.max_skew);
  j["min_period"] = opt(r.min_period);
  j["max_period"] = opt(r.max_period);
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["passed"] = c.passed;
    cj["evaluated"] = c.evaluated;
    cj["margin"] = opt(c.margin);
    cj["witnesses"] = nlohmann::ordered_json::array();
    for (const auto& w : c.witnesses) {
      nlohmann::ordered_json wj;
      wj["round"] = w.round;
      wj["nodes"] = w.nodes;
      wj["times"] = nlohmann::ordered_json::array();
      for (const auto& t : w.times) wj["times"].push_back(format_rational(t));
      wj["detail"] = w.detail;
      cj["witnesses"].push_back(std::move(wj));
    }
    j["checks"].push_back(std::move(cj));
  }
  return j;
}

namespace {

std::vector<NodeId> honest_nodes(const ExecutionTrace& trace) {
  std::vector<NodeId> h;
  for (NodeId v = 0; v < trace.n; ++v) {
    if (trace.honest(v)) h.push_back(v);
  }
  return h;
}

CheckResult named(std::string name) {
  CheckResult c;
  c.name = std::move(name);
  return c;
}

// pulse[index][node] for honest nodes; duplicates counted separately.
struct PulseTable {
  std::map<std::uint64_t, std::map<NodeId, TimePoint>> at;
  std::map<std::pair<NodeId, std::uint64_t>, std::size_t> count;

  explicit PulseTable(const ExecutionTrace& trace) {
    for (const auto& p : trace.pulses) {
      if (++count[{p.node, p.index}] == 1) at[p.index][p.node] = p.t;
    }
  }

  std::optional<std::pair<Rational, Rational>> range(std::uint64_t i, std::size_t honest) const {
    auto it = at.find(i);
    if (it == at.end() || it->second.size() != honest) return std::nullopt;
    Rational lo = it->second.begin()->second, hi = lo;
    for (const auto& [v, t] : it->second) {
      lo = min(lo, t);
      hi = max(hi, t);
    }
    return std::make_pair(lo, hi);
  }
};

}  // namespace

ConformanceReport check_pulse_sync(const ExecutionTrace& trace, const Rational& S, const Rational& P_min,
                                   const Rational& P_max, std::uint64_t R) {
  const std::vector<NodeId> honest = honest_nodes(trace);
  const PulseTable table(trace);
  ConformanceReport report;
  CheckResult live = named("liveness"), skew = named("skew"), pmin = named("min_period"), pmax = named("max_period");

  for (NodeId v : honest) {
    for (std::uint64_t i = 1; i <= R; ++i) {
      auto it = table.count.find({v, i});
      const std::size_t c = it == table.count.end() ? 0 : it->second;
      live.observe(Rational(c == 1 ? 0 : -1), false,
                   Witness{i, {v}, {}, "pulse " + std::to_string(i) + " emitted " + std::to_string(c) + " times"});
    }
  }
  for (std::uint64_t i = 1; i <= R; ++i) {
    const auto r = table.range(i, honest.size());
    if (!r) continue;
    const Rational spread = r->second - r->first;
    report.max_skew = report.max_skew ? max(*report.max_skew, spread) : spread;
    skew.observe(Rational(S - spread), false, Witness{i, honest, {r->first, r->second}, "skew " + format_rational(spread)});
    if (i == R) continue;
    const auto next = table.range(i + 1, honest.size());
    if (!next) continue;
    const Rational shortest = next->first - r->second;
    const Rational longest = next->second - r->first;
    report.min_period = report.min_period ? min(*report.min_period, shortest) : shortest;
    report.max_period = report.max_period ? max(*report.max_period, longest) : longest;
    pmin.observe(Rational(shortest - P_min), false,
                 Witness{i, honest, {r->second, next->first}, "period " + format_rational(shortest)});
    pmax.observe(Rational(P_max - longest), false,
                 Witness{i, honest, {r->first, next->second}, "period " + format_rational(longest)});
  }
  report.checks = {live, skew, pmin, pmax};
  return report;
}

ConformanceReport check_lemma_suite(const ExecutionTrace& trace, const SystemParams& p,
                                    std::optional<std::uint64_t> R) {
  const std::vector<NodeId> honest = honest_nodes(trace);
  const PulseTable table(trace);

  // Notes per (round, node).
  struct NodeRound {
    std::map<NodeId, std::optional<LocalTime>> outputs;
    const NoteRecord* correction = nullptr;
  };
  std::map<std::uint64_t, std::map<NodeId, NodeRound>> rounds;
  for (const auto& n : trace.notes) {
    if (n.note.kind == "tcb_output") rounds[n.note.round][n.node].outputs[n.note.subject] = n.note.value;
    if (n.note.kind == "correction") rounds[n.note.round][n.node].correction = &n;
  }

  CheckResult l3 = named("lemma3"), l4 = named("lemma4"), l5 = named("lemma5"), l6 = named("lemma6"), l7 = named("lemma7"), c4 = named("corollary4"), l8 = named("lemma8");
  const Rational lemma4_bound = (1 - 1 / p.theta) * p.d + 2 * p.u / p.theta;

  for (const auto& [r, per_node] : rounds) {
    if (R && r > *R) break;
    const auto range = table.range(r, honest.size());
    if (!range) continue;
    bool complete = true;
    for (NodeId v : honest) {
      auto it = per_node.find(v);
      if (it == per_node.end() || it->second.correction == nullptr) complete = false;
    }
    if (!complete) continue;

    const auto& pulses = table.at.at(r);
    const Rational norm = range->second - range->first;
    const bool skew_ok = norm <= p.S;
    auto est = [&](NodeId v, NodeId w) -> const std::optional<Rational>& {
      return per_node.at(v).correction->note.estimates.at(w);
    };

    for (NodeId v : honest) {
      const NodeRound& nr = per_node.at(v);
      const NoteRecord& corr = *nr.correction;
      const Rational& pv = pulses.at(v);
      const ClockSchedule& Hv = trace.clocks[v];
      const Rational Pv = Hv.at(pv);
      const Rational Dv = *corr.note.value;

      for (NodeId w : honest) {
        if (skew_ok) {
          const bool accepted = nr.outputs.contains(w) && nr.outputs.at(w).has_value();
          l3.observe(Rational(accepted ? 0 : -1), false, Witness{r, {v, w}, {pv}, "honest dealer not accepted"});
          if (const auto& e = est(v, w); e) {
            const Rational diff = pulses.at(w) - pv;
            const Rational lo = *e - diff;
            const Rational hi = diff + p.delta - *e;
            l5.observe(lo, false, Witness{r, {v, w}, {pv, pulses.at(w)}, "estimate " + format_rational(*e) + " below offset"});
            l5.observe(hi, true, Witness{r, {v, w}, {pv, pulses.at(w)}, "estimate " + format_rational(*e) + " reaches offset + delta"});
          }
        }
      }

      if (skew_ok) {
        l7.observe(Rational(Dv + norm), false, Witness{r, {v}, {pv}, "correction " + format_rational(Dv) + " below -||p||"});
        l7.observe(Rational(norm + p.delta - Dv), false,
                   Witness{r, {v}, {pv}, "correction " + format_rational(Dv) + " above ||p|| + delta"});
      }
      c4.observe(Rational(Pv + Dv + p.T - Hv.at(corr.t)), false,
                 Witness{r, {v}, {pv, corr.t}, "next pulse precedes termination"});
    }

    // Cross-node checks, over every dealer.
    for (std::size_t a = 0; a < honest.size(); ++a) {
      for (std::size_t b = a + 1; b < honest.size(); ++b) {
        const NodeId v = honest[a], w = honest[b];
        for (NodeId x = 0; x < trace.n; ++x) {
          const auto& ov = per_node.at(v).outputs;
          const auto& ow = per_node.at(w).outputs;
          if (!ov.contains(x) || !ow.contains(x) || !ov.at(x) || !ow.at(x)) continue;
          const Rational tv = trace.clocks[v].inverse(*ov.at(x));
          const Rational tw = trace.clocks[w].inverse(*ow.at(x));
          const Rational gap = tv > tw ? Rational(tv - tw) : Rational(tw - tv);
          l4.observe(Rational(lemma4_bound - gap), false, Witness{r, {v, w, x}, {tv, tw}, "reception gap " + format_rational(gap)});
          if (skew_ok && est(v, x) && est(w, x)) {
            Rational dev = *est(v, x) - *est(w, x) - (pulses.at(w) - pulses.at(v));
            if (dev < 0) dev = -dev;
            l6.observe(Rational(p.delta - dev), true, Witness{r, {v, w, x}, {pulses.at(v), pulses.at(w)}, "deviation " + format_rational(dev)});
          }
        }
      }
    }

    if (skew_ok) {
      // ||Delta + p|| <= ||p||/2 + delta
      Rational lo, hi;
      bool first = true;
      for (NodeId v : honest) {
        const Rational x = *per_node.at(v).correction->note.value + pulses.at(v);
        if (first || x < lo) lo = x;
        if (first || x > hi) hi = x;
        first = false;
      }
      l7.observe(Rational(norm / 2 + p.delta - (hi - lo)), false,
                 Witness{r, honest, {lo, hi}, "corrected spread " + format_rational(Rational(hi - lo))});
    }

    if (const auto next = table.range(r + 1, honest.size()); next && skew_ok) {
      const Rational next_norm = next->second - next->first;
      l8.observe(Rational(p.S - next_norm), false, Witness{r + 1, honest, {next->first, next->second}, "skew " + format_rational(next_norm)});
      const Rational advance = next->first - range->first;
      l8.observe(Rational(advance - (p.T - p.S) / p.theta), false,
                 Witness{r, honest, {range->first, next->first}, "advance " + format_rational(advance)});
      l8.observe(Rational(p.T + p.S + p.delta - advance), false,
                 Witness{r, honest, {range->first, next->first}, "advance " + format_rational(advance)});
    }
  }

  ConformanceReport report;
  report.checks = {l3, l4, l5, l6, l7, c4, l8};
  return report;
}

}  // namespace pulsesync
