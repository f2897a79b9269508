// Acceptance criteria, one per invocation: `acceptance <1..8>`.
//
// Prints one line "criterion N: PASS|FAIL  <summary>" (plus indented detail
// lines) and exits 0 on pass, 1 on failure.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "pulsesync/adversaries.hpp"
#include "pulsesync/analysis.hpp"
#include "pulsesync/config.hpp"
#include "pulsesync/cps.hpp"
#include "pulsesync/lower_bound.hpp"
#include "pulsesync/random.hpp"
#include "pulsesync/sync_adversaries.hpp"
#include "pulsesync/sync_engine.hpp"

using namespace pulsesync;

namespace {

struct Outcome {
  bool passed = true;
  std::string summary;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    if (!ok) passed = false;
    details.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
  }
};

std::pair<Rational, Rational> range_of(const std::map<NodeId, Rational>& values) {
  auto [lo, hi] = std::minmax_element(values.begin(), values.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
  return {lo->second, hi->second};
}

// ---------------------------------------------------------------- 1

Outcome apa_contraction() {
  Outcome o;
  Rng rng(20240601);
  const std::vector<std::string> adversaries{"silent", "consistent_liar", "equivocator"};
  std::size_t runs = 0, iterations = 0, violations = 0;
  for (std::size_t n : {3, 5, 7}) {
    const std::size_t f = max_fault_budget(n);
    for (const auto& name : adversaries) {
      for (int trial = 0; trial < 120; ++trial) {
        NodeSet corrupted;
        while (corrupted.size() < f) corrupted.insert(static_cast<NodeId>(rng.below(n)));
        const Rational spread = rng.grid(make_rational(1, 10), 10, 99);
        std::map<NodeId, Rational> inputs;
        for (NodeId v = 0; v < n; ++v) {
          if (!corrupted.contains(v)) inputs[v] = rng.grid(0, spread, 1000);
        }
        const Rational eps = spread / (1 << rng.between(1, 8));
        auto adv = make_sync_adversary(name, rng.below(1ull << 40));
        const ApaRun run = run_apa(n, f, inputs, spread, eps, corrupted, *adv);
        ++runs;
        for (std::size_t k = 1; k < run.values.size(); ++k) {
          ++iterations;
          const auto [lo, hi] = range_of(run.values[k - 1]);
          bool ok = spread_of(run.values[k]) * 2 <= spread_of(run.values[k - 1]);
          for (const auto& [v, x] : run.values[k]) ok = ok && lo <= x && x <= hi;
          if (!ok) ++violations;
        }
      }
    }
  }
  o.require(runs >= 1000, std::to_string(runs) + " randomized runs (n in {3,5,7}, three adversaries)");
  o.require(violations == 0, std::to_string(iterations) + " iterations, " + std::to_string(violations) +
                                 " violating halving or containment");
  o.summary = "APA halves the spread and stays in range on every iteration";
  return o;
}

// ---------------------------------------------------------------- 2

Outcome apa_round_count() {
  Outcome o;
  auto check = [&](const Rational& eps, std::size_t iters) {
    for (const std::string name : {"silent", "consistent_liar", "equivocator"}) {
      auto adv = make_sync_adversary(name, 7);
      const ApaRun run = run_apa(5, 2, {{0, 0}, {1, make_rational(1, 3)}, {2, 1}}, 1, eps, NodeSet{3, 4}, *adv);
      o.require(run.iterations.size() == iters && run.rounds == 2 * iters && spread_of(run.outputs()) <= eps,
                "l = 1, eps = " + format_rational(eps) + ", " + name + ": " + std::to_string(run.iterations.size()) +
                    " iterations, " + std::to_string(run.rounds) + " rounds, final spread " +
                    format_rational(spread_of(run.outputs())));
    }
  };
  check(make_rational(1, 8), 3);
  check(make_rational(1, 1024), 10);
  o.summary = "APA iteration and round counts";
  return o;
}

// ---------------------------------------------------------------- 3

Outcome feasibility_boundary() {
  Outcome o;
  const auto at111 = solve_parameters(1, 0, make_rational(111, 100));
  const auto at112 = solve_parameters(1, 0, make_rational(112, 100));
  o.require(at111.feasible, "theta = 111/100 reported feasible (polynomial " + format_rational(at111.polynomial) + ")");
  o.require(!at112.feasible, "theta = 112/100 reported infeasible (polynomial " + format_rational(at112.polynomial) + ")");
  const Rational stated111 = parse_rational("0.019307");
  const Rational stated112 = parse_rational("-0.080384");
  o.require(at111.polynomial == stated111, "polynomial(111/100) = " + format_rational(at111.polynomial) +
                                               ", expected " + format_rational(stated111));
  o.require(at112.polynomial == stated112, "polynomial(112/100) = " + format_rational(at112.polynomial) +
                                               ", expected " + format_rational(stated112));
  o.summary = "feasibility boundary of the drift polynomial";
  return o;
}

// ---------------------------------------------------------------- 4, 5

struct GridPoint {
  Rational theta, u, d;
};

std::vector<GridPoint> campaign_grid() {
  std::vector<GridPoint> g;
  for (const Rational& theta : {make_rational(1001, 1000), make_rational(101, 100), make_rational(21, 20)}) {
    g.push_back({theta, 0, 1});
    g.push_back({theta, make_rational(1, 100), 1});
    g.push_back({theta, make_rational(1, 10), 1});
    g.push_back({theta, make_rational(1, 4), make_rational(5, 2)});
  }
  return g;
}

struct CampaignRun {
  std::string label;
  SystemParams params;
  ParameterSolution solution;
  ExecutionTrace trace;
};

constexpr std::uint64_t kCampaignPulses = 200;

// Every grid point x adversary x delay policy, worst-case drift clocks.
void for_each_campaign_run(const std::function<void(CampaignRun&)>& visit) {
  std::uint64_t seed = 1;
  for (const auto& g : campaign_grid()) {
    const auto sol = solve_parameters(g.d, g.u, g.theta);
    const SystemParams p = sol.params(4, 1);
    for (const auto& adversary : des_adversary_names()) {
      for (const std::string delays : {"random", "split"}) {
        SimulationSetup s;
        s.params = p;
        s.clocks = preset_clocks("extremes", p);
        s.corrupted = {3};
        s.horizon = p.S + sol.P_max * static_cast<long>(kCampaignPulses + 2);
        s.stop_after_pulse = kCampaignPulses + 1;
        auto delay = preset_delays(delays, p, seed++);
        auto adv = make_des_adversary(adversary, p);
        CampaignRun run{"theta=" + format_rational(g.theta) + " u=" + format_rational(g.u) + " d=" +
                            format_rational(g.d) + " " + adversary + "/" + delays,
                        p, sol, run_simulation(s, make_cps_factory(p), *delay, *adv)};
        visit(run);
      }
    }
  }
}

Outcome skew_bound() {
  Outcome o;
  std::size_t runs = 0, failed = 0;
  Rational worst_ratio = 0;
  for_each_campaign_run([&](CampaignRun& run) {
    ++runs;
    const auto r = check_pulse_sync(run.trace, run.solution.S, run.solution.P_min, run.solution.P_max, kCampaignPulses);
    if (!r.passed()) {
      ++failed;
      o.details.push_back("FAIL  " + run.label + ": " + to_json(r).dump());
    }
    if (r.max_skew) worst_ratio = max(worst_ratio, Rational(*r.max_skew / run.solution.S));
  });
  o.require(failed == 0, std::to_string(runs) + " runs of " + std::to_string(kCampaignPulses) +
                             " pulses (12 grid points x 4 adversaries x 2 delay policies), " + std::to_string(failed) +
                             " with skew above S or a period outside [P_min, P_max]");
  o.details.push_back("      largest skew / S = " + to_decimal(worst_ratio, 4));
  o.summary = "CPS skew and period bounds over the campaign";
  return o;
}

Outcome lemma_suite() {
  Outcome o;
  std::size_t runs = 0, failed = 0;
  std::map<std::string, std::size_t> evaluated;
  std::optional<CampaignRun> control;
  for_each_campaign_run([&](CampaignRun& run) {
    ++runs;
    const auto r = check_lemma_suite(run.trace, run.params, kCampaignPulses);
    for (const auto& c : r.checks) evaluated[c.name] += c.evaluated;
    if (!r.passed()) {
      ++failed;
      o.details.push_back("FAIL  " + run.label + ": " + to_json(r).dump());
    }
    if (!control && run.label.find("silent/random") != std::string::npos) control = std::move(run);
  });
  o.require(failed == 0, std::to_string(runs) + " campaign traces, " + std::to_string(failed) + " with a violated lemma");
  for (const auto& [name, count] : evaluated) {
    o.require(count > 0, name + ": " + std::to_string(count) + " inequalities evaluated");
  }

  // Negative controls: one estimate pushed up by delta, one correction pushed
  // below -||p||; the matching checks must fail and point at the round.
  auto estimate = control->trace;
  for (auto& n : estimate.notes) {
    if (n.note.kind == "correction" && n.note.round == 17 && n.node == 1 && n.note.estimates.at(0)) {
      *n.note.estimates.at(0) += control->params.delta;
      break;
    }
  }
  const auto bad5 = check_lemma_suite(estimate, control->params, kCampaignPulses);
  const CheckResult* l5 = bad5.find("lemma5");
  o.require(l5 && !l5->passed && !l5->witnesses.empty() && l5->witnesses.front().round == 17,
            "corrupted estimate (round 17, node 1, dealer 0) fails lemma5 with a witness" +
                (l5 && !l5->witnesses.empty() ? ": " + l5->witnesses.front().detail : std::string()));

  auto correction = control->trace;
  for (auto& n : correction.notes) {
    if (n.note.kind == "correction" && n.note.round == 40 && n.node == 2) {
      *n.note.value -= control->params.S;
      break;
    }
  }
  const auto bad7 = check_lemma_suite(correction, control->params, kCampaignPulses);
  const CheckResult* l7 = bad7.find("lemma7");
  o.require(l7 && !l7->passed && !l7->witnesses.empty() && l7->witnesses.front().round == 40,
            "corrupted correction (round 40, node 2) fails lemma7 with a witness" +
                (l7 && !l7->witnesses.empty() ? ": " + l7->witnesses.front().detail : std::string()));
  o.summary = "per-round lemma inequalities on every campaign trace";
  return o;
}

// ---------------------------------------------------------------- 6

// Zero drift, zero uncertainty: the estimate of dealer w at v is exactly
// p_w - p_v, so CPS's correction is APA on the pulse times, shifted by -p_v.
SystemParams zero_params(std::size_t n, std::size_t f) {
  SystemParams p;
  p.n = n;
  p.f = f;
  p.d = 1;
  p.u = 0;
  p.u_tilde = 0;
  p.theta = 1;
  p.S = 1;
  p.T = 10;
  p.delta = measurement_error_bound(p.theta, p.d, p.u, p.S);
  return p;
}

Outcome apa_oracle() {
  Outcome o;
  Rng rng(777);
  std::size_t instances = 0, mismatches = 0;

  // Synthetic: CB outputs from the lock-step engine become reception times.
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng.below(5);
    const std::size_t f = max_fault_budget(n);
    const SystemParams p = zero_params(n, f);
    NodeSet corrupted;
    while (corrupted.size() < f) corrupted.insert(static_cast<NodeId>(rng.below(n)));
    std::map<NodeId, Rational> pulses, offsets;
    for (NodeId v = 0; v < n; ++v) {
      if (corrupted.contains(v)) continue;
      pulses[v] = rng.grid(0, p.S, 64);
      offsets[v] = rng.grid(0, 5, 40);
    }
    static const char* names[] = {"silent", "consistent_liar", "equivocator"};
    auto adv = make_sync_adversary(names[rng.below(3)], rng.below(1ull << 40));
    const auto apa = run_apa_iteration(n, f, pulses, corrupted, *adv);
    for (const auto& [v, pv] : pulses) {
      std::vector<std::optional<Rational>> est(n);
      for (NodeId w = 0; w < n; ++w) {
        const CbOutput& b = apa.received.at(v).at(w);
        // Dealer sends at its local pulse + theta*S and the message takes d.
        if (b) est[w] = offset_estimate(p, Rational(offsets[v] + *b + p.theta * p.S + p.d), Rational(offsets[v] + pv));
      }
      ++instances;
      if (cps_compute_correction(est, f).delta != apa.outputs.at(v) - pv) ++mismatches;
    }
  }

  // End to end: CPS on the simulator against APA on the recorded pulse times.
  std::size_t des_rounds = 0, des_mismatch = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const SystemParams p = zero_params(4, 1);
    SimulationSetup s;
    s.params = p;
    for (NodeId v = 0; v < 4; ++v) s.clocks.push_back(ClockSchedule::identity(rng.grid(0, p.S, 32)));
    s.corrupted = {static_cast<NodeId>(rng.below(4))};
    s.horizon = 100;
    s.stop_after_pulse = 6;
    FixedDelay delay(p.d);
    NullAdversary adv;
    const auto trace = run_simulation(s, make_cps_factory(p), delay, adv);
    for (std::uint64_t r = 1; r <= 5; ++r) {
      std::map<NodeId, Rational> pr;
      for (NodeId v = 0; v < 4; ++v) {
        if (trace.honest(v)) pr[v] = *trace.pulse_time(v, r);
      }
      SyncSilent silent;
      const auto apa = run_apa_iteration(4, 1, pr, s.corrupted, silent);
      for (const auto& n : trace.notes) {
        if (n.note.kind != "correction" || n.note.round != r) continue;
        ++des_rounds;
        if (*n.note.value != apa.outputs.at(n.node) - pr.at(n.node)) ++des_mismatch;
      }
    }
  }
  o.require(instances >= 100 && mismatches == 0,
            std::to_string(instances) + " synthetic instances (n in 3..7, three adversaries), " +
                std::to_string(mismatches) + " mismatches");
  o.require(des_rounds > 0 && des_mismatch == 0, std::to_string(des_rounds) +
                                                     " simulated corrections (n = 4, random offsets), " +
                                                     std::to_string(des_mismatch) + " mismatches");
  o.summary = "CPS correction equals APA on pulse times";
  return o;
}

// ---------------------------------------------------------------- 7

Outcome lower_bound() {
  Outcome o;
  const auto sol = solve_parameters(1, 0, make_rational(101, 100), make_rational(3, 10));
  const SystemParams p = sol.params(3, 1);
  const std::uint64_t r = attack_round(p.u_tilde, sol.P_min, p.theta);
  try {
    const auto triple = build_execution_triple_with_retry(make_attack_behavior("cps", p), p, attack_horizon(p, r));
    const auto report = verify_lower_bound(triple, r);
    const Rational two_thirds = 2 * triple.params.u_tilde / 3;
    std::ostringstream views;
    for (int i = 0; i < 3; ++i) views << (i ? ", " : "") << "node " << i << " up to local " << to_decimal(triple.view_horizon[i], 3);
    o.require(triple.indistinguishable(), "(a) local views equal between the two executions each node is honest in (" +
                                              views.str() + ")");
    o.require(report.sum == 2 * triple.params.u_tilde,
              "(b) pulse " + std::to_string(r) + ": skew sum " + format_rational(report.sum) + ", 2 u_tilde = " +
                  format_rational(Rational(2 * triple.params.u_tilde)));
    o.require(report.max_skew >= two_thirds, "(c) max skew " + format_rational(report.max_skew) + " >= 2 u_tilde/3 = " +
                                                 format_rational(two_thirds));
    std::string audit = std::to_string(triple.faulty_messages) + " faulty messages, " +
                        std::to_string(triple.receive_ties) + " receive ties, " + std::to_string(triple.retries) +
                        " retries";
    if (!triple.audits_ok()) audit += "; first failure: " + triple.audit_failures.front();
    o.require(triple.audits_ok(), "audits (delays, clocks, signature availability): " + audit);
  } catch (const std::exception& e) {
    o.require(false, std::string("attack aborted: ") + e.what());
  }
  o.summary = "three-execution attack at n = 3, u = 0, u_tilde = 3/10, r* = " + std::to_string(r);
  return o;
}

// ---------------------------------------------------------------- 8

std::map<std::string, std::string> run_and_collect(ExperimentConfig c, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::remove_all(dir);
  fs::create_directories(dir);
  c.trace_out = (dir / "trace.jsonl").string();
  c.report_out = (dir / "report.json").string();
  std::ostringstream out;
  cli::run_command(c, out);
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    files[entry.path().filename().string()] = s.str();
  }
  files["<stdout>"] = out.str();
  return files;
}

Outcome determinism() {
  Outcome o;
  const auto root = std::filesystem::temp_directory_path() / "pulsesync_acceptance_c8";
  std::vector<ExperimentConfig> configs;
  for (const auto& adversary : des_adversary_names()) {
    ExperimentConfig c;
    c.mode = "simulate";
    c.adversary = adversary;
    c.pulses = 40;
    c.seed = 99;
    configs.push_back(c);
  }
  {
    ExperimentConfig c;
    c.mode = "apa";
    c.n = 7;
    c.f = 3;
    c.adversary = "equivocator";
    c.epsilon = make_rational(1, 4096);
    c.seed = 5;
    configs.push_back(c);
  }
  {
    ExperimentConfig c;
    c.mode = "attack";
    c.n = 3;
    c.u = 0;
    c.u_tilde = make_rational(3, 10);
    configs.push_back(c);
  }
  {
    ExperimentConfig c;
    c.mode = "params";
    configs.push_back(c);
  }
  for (const auto& c : configs) {
    const auto a = run_and_collect(c, root / "a");
    const auto b = run_and_collect(c, root / "b");
    std::size_t bytes = 0;
    for (const auto& [name, content] : a) bytes += content.size();
    o.require(a == b && a.size() >= 2, c.mode + (c.mode == "simulate" ? " (" + c.adversary + ")" : std::string()) +
                                           ": " + std::to_string(a.size()) + " outputs, " + std::to_string(bytes) +
                                           " bytes, identical across two runs");
  }
  std::filesystem::remove_all(root);
  o.summary = "repeated runs produce byte-identical outputs";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <criterion 1..8>\n";
    return 2;
  }
  const int which = std::atoi(argv[1]);
  static const std::function<Outcome()> criteria[] = {apa_contraction, apa_round_count, feasibility_boundary,
                                                      skew_bound,      lemma_suite,     apa_oracle,
                                                      lower_bound,     determinism};
  if (which < 1 || which > 8) {
    std::cerr << "criterion must be 1..8\n";
    return 2;
  }
  const auto start = std::chrono::steady_clock::now();
  const Outcome o = criteria[which - 1]();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "criterion " << which << ": " << (o.passed ? "PASS" : "FAIL") << "  " << o.summary << " ("
            << std::fixed << std::setprecision(2) << secs << "s)\n";
  for (const auto& d : o.details) std::cout << "    " << d << "\n";
  return o.passed ? 0 : 1;
}
