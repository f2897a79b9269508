#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>

#include "pulsesync/adversaries.hpp"
#include "pulsesync/analysis.hpp"
#include "pulsesync/cps.hpp"
#include "pulsesync/lower_bound.hpp"
#include "pulsesync/random.hpp"
#include "pulsesync/sync_adversaries.hpp"
#include "pulsesync/sync_engine.hpp"

namespace pulsesync::cli {

namespace {

using Json = nlohmann::ordered_json;

CommandResult config_error(const std::string& message, std::ostream& out) {
  out << "configuration error: " << message << "\n";
  return CommandResult{kConfigError, Json{{"error", message}}};
}

void row(std::ostream& out, const std::string& name, const Rational& value) {
  out << "  " << std::left << std::setw(18) << name << std::setw(14) << to_decimal(value, 6) << format_rational(value)
      << "\n";
}

void write_report(const ExperimentConfig& c, const Json& report) {
  if (c.report_out.empty()) return;
  std::ofstream f(c.report_out);
  if (!f) throw ConfigError("cannot write report '" + c.report_out + "'");
  f << report.dump(2) << "\n";
}

std::ofstream open_trace(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write trace '" + path + "'");
  return f;
}

ParameterSolution solve(const ExperimentConfig& c) {
  return solve_parameters(c.d, c.u, c.theta, c.u_tilde, c.t_scale);
}

void print_checks(std::ostream& out, const ConformanceReport& r) {
  for (const auto& check : r.checks) {
    out << "  " << std::left << std::setw(12) << check.name << (check.passed ? "pass" : "FAIL") << "  evaluated "
        << std::setw(8) << check.evaluated;
    if (check.margin) out << " margin " << to_decimal(*check.margin, 6);
    out << "\n";
    for (const auto& w : check.witnesses) out << "      round " << w.round << ": " << w.detail << "\n";
  }
}

}  // namespace

CommandResult cmd_params(const ExperimentConfig& c, std::ostream& out) {
  ParameterSolution s;
  try {
    s = solve(c);
  } catch (const std::invalid_argument& e) {
    return config_error(e.what(), out);
  }
  const Json report = to_json(s);
  out << (s.usable() ? "feasible" : "infeasible") << " (binding:";
  for (const auto& b : s.binding) out << " " << b;
  out << ")\n";
  row(out, "polynomial", s.polynomial);
  row(out, "skew coefficient", s.skew_coefficient);
  row(out, "joint coefficient", s.joint_coefficient);
  if (s.usable()) {
    row(out, "delta", s.delta);
    row(out, "S", s.S);
    row(out, "T", s.T);
    row(out, "P_min", s.P_min);
    row(out, "P_max", s.P_max);
  }
  write_report(c, report);
  return CommandResult{s.usable() ? kPass : kConformanceFailure, report};
}

CommandResult cmd_simulate(const ExperimentConfig& c, std::ostream& out) {
  ParameterSolution sol;
  try {
    sol = solve(c);
  } catch (const std::invalid_argument& e) {
    return config_error(e.what(), out);
  }
  if (!sol.usable()) {
    std::string names;
    for (const auto& b : sol.binding) names += " " + b;
    return config_error("infeasible parameters (binding:" + names + ")", out);
  }
  const SystemParams raw = sol.params(c.n, c.f);
  const ParamCheck check = validate_params(raw);
  if (!check.ok()) {
    std::string names;
    for (const auto& v : check.violations) names += " [" + v.constraint + "] " + v.detail;
    return config_error("parameters rejected:" + names, out);
  }
  const SystemParams& p = *check.accepted;
  const NodeSet corrupted = corrupted_nodes(c);
  if (corrupted.size() > p.f) return config_error("more corrupted nodes than f", out);
  for (NodeId v : corrupted) {
    if (v >= p.n) return config_error("corrupted id " + std::to_string(v) + " out of range", out);
  }

  std::unique_ptr<Adversary> adversary;
  std::unique_ptr<DelayPolicy> delays;
  SimulationSetup setup;
  try {
    adversary = make_des_adversary(c.adversary, p, AdversaryKnobs{c.shift, c.spread});
    delays = preset_delays(c.delays, p, c.seed);
    setup.clocks = preset_clocks(c.clocks, p);
  } catch (const std::exception& e) {
    return config_error(e.what(), out);
  }
  setup.params = p;
  setup.corrupted = corrupted;
  setup.horizon = c.horizon.value_or(TimePoint(p.S + sol.P_max * static_cast<long>(c.pulses + 2)));
  setup.stop_after_pulse = c.pulses + 1;

  Json report;
  report["generator"] = Rng::kGenerator;
  report["seed"] = c.seed;
  report["params"] = to_json(sol);
  report["n"] = p.n;
  report["f"] = p.f;
  report["corrupted"] = std::vector<NodeId>(corrupted.begin(), corrupted.end());
  report["adversary"] = c.adversary;
  report["clocks"] = c.clocks;
  report["delays"] = c.delays;
  report["pulses"] = c.pulses;

  ExecutionTrace trace;
  try {
    trace = run_simulation(setup, make_cps_factory(p), *delays, *adversary);
  } catch (const ModelViolation& e) {
    out << "simulation left the model: " << e.what() << "\n";
    report["error"] = e.what();
    report["passed"] = false;
    write_report(c, report);
    return CommandResult{kConformanceFailure, report};
  }
  if (!c.trace_out.empty()) {
    auto f = open_trace(c.trace_out);
    write_trace_jsonl(trace, f);
  }
  const ConformanceReport sync = check_pulse_sync(trace, p.S, sol.P_min, sol.P_max, c.pulses);
  const ConformanceReport lemmas = check_lemma_suite(trace, p, c.pulses);
  const bool passed = sync.passed() && lemmas.passed();
  report["events"] = trace.events.size();
  report["sync"] = to_json(sync);
  report["lemmas"] = to_json(lemmas);
  report["passed"] = passed;

  out << "n=" << p.n << " f=" << p.f << " adversary=" << c.adversary << " clocks=" << c.clocks
      << " delays=" << c.delays << " pulses=" << c.pulses << "\n";
  row(out, "S", p.S);
  if (sync.max_skew) row(out, "max skew", *sync.max_skew);
  row(out, "P_min", sol.P_min);
  if (sync.min_period) row(out, "min period", *sync.min_period);
  row(out, "P_max", sol.P_max);
  if (sync.max_period) row(out, "max period", *sync.max_period);
  print_checks(out, sync);
  print_checks(out, lemmas);
  out << (passed ? "PASS" : "FAIL") << "\n";
  write_report(c, report);
  return CommandResult{passed ? kPass : kConformanceFailure, report};
}

CommandResult cmd_apa(const ExperimentConfig& c, std::ostream& out) {
  if (c.n < 1) return config_error("n must be positive", out);
  if (c.f > max_fault_budget(c.n)) {
    return config_error("f = " + std::to_string(c.f) + " exceeds ceil(n/2)-1 for n = " + std::to_string(c.n), out);
  }
  if (c.epsilon <= 0) return config_error("epsilon must be positive", out);
  const NodeSet corrupted = corrupted_nodes(c);
  if (corrupted.size() > c.f) return config_error("more corrupted nodes than f", out);
  std::unique_ptr<SyncAdversary> adversary;
  try {
    adversary = make_sync_adversary(c.adversary, c.seed);
  } catch (const std::exception& e) {
    return config_error(e.what(), out);
  }

  std::map<NodeId, Rational> inputs;
  if (!c.values.empty()) {
    if (c.values.size() != c.n) return config_error("values must list one input per node", out);
    for (NodeId v = 0; v < c.n; ++v) {
      if (!corrupted.contains(v)) inputs[v] = c.values[v];
    }
  } else {
    Rng rng(c.seed);
    const Rational hi = c.value_spread.value_or(Rational(1));
    for (NodeId v = 0; v < c.n; ++v) {
      if (!corrupted.contains(v)) inputs[v] = rng.grid(0, hi, 64);
    }
  }
  const Rational spread = c.value_spread.value_or(spread_of(inputs));
  if (spread_of(inputs) > spread) return config_error("inputs spread more than value_spread", out);

  ApaRun run;
  try {
    run = run_apa(c.n, c.f, inputs, spread, c.epsilon, corrupted, *adversary);
  } catch (const ModelViolation& e) {
    out << "run left the model: " << e.what() << "\n";
    Json report{{"error", e.what()}, {"passed", false}};
    write_report(c, report);
    return CommandResult{kConformanceFailure, report};
  }
  if (!c.trace_out.empty()) {
    auto f = open_trace(c.trace_out);
    write_apa_jsonl(run.records, f);
  }

  bool passed = true;
  Json iterations = Json::array();
  for (std::size_t k = 1; k < run.values.size(); ++k) {
    const auto& in = run.values[k - 1];
    const auto& outv = run.values[k];
    Rational lo = in.begin()->second, hi = lo;
    for (const auto& [v, x] : in) {
      lo = min(lo, x);
      hi = max(hi, x);
    }
    bool contained = true;
    for (const auto& [v, x] : outv) contained = contained && lo <= x && x <= hi;
    const bool halved = 2 * spread_of(outv) <= spread_of(in);
    passed = passed && contained && halved;
    iterations.push_back(Json{{"iteration", k},
                              {"spread_in", format_rational(spread_of(in))},
                              {"spread_out", format_rational(spread_of(outv))},
                              {"halved", halved},
                              {"contained", contained}});
  }
  const bool converged = spread_of(run.outputs()) <= c.epsilon;
  passed = passed && converged;

  Json report;
  report["generator"] = Rng::kGenerator;
  report["seed"] = c.seed;
  report["n"] = c.n;
  report["f"] = c.f;
  report["adversary"] = c.adversary;
  report["corrupted"] = std::vector<NodeId>(corrupted.begin(), corrupted.end());
  report["spread"] = format_rational(spread);
  report["epsilon"] = format_rational(c.epsilon);
  report["iterations"] = run.iterations.size();
  report["rounds"] = run.rounds;
  Json in_json, out_json;
  for (const auto& [v, x] : inputs) in_json[std::to_string(v)] = format_rational(x);
  for (const auto& [v, x] : run.outputs()) out_json[std::to_string(v)] = format_rational(x);
  report["inputs"] = in_json;
  report["outputs"] = out_json;
  report["per_iteration"] = iterations;
  report["converged"] = converged;
  report["passed"] = passed;

  out << "n=" << c.n << " f=" << c.f << " adversary=" << c.adversary << " iterations=" << run.iterations.size()
      << " rounds=" << run.rounds << "\n";
  for (const auto& it : iterations) {
    out << "  iteration " << std::setw(3) << it["iteration"].get<std::size_t>() << "  spread "
        << it["spread_in"].get<std::string>() << " -> " << it["spread_out"].get<std::string>()
        << (it["halved"].get<bool>() && it["contained"].get<bool>() ? "" : "  FAIL") << "\n";
  }
  out << (passed ? "PASS" : "FAIL") << "\n";
  write_report(c, report);
  return CommandResult{passed ? kPass : kConformanceFailure, report};
}

CommandResult cmd_attack(const ExperimentConfig& c, std::ostream& out) {
  if (c.n != 3) return config_error("the attack runs at n = 3", out);
  if (c.f != 1) return config_error("the attack corrupts exactly one node (f = 1)", out);
  ParameterSolution sol;
  try {
    sol = solve(c);
  } catch (const std::invalid_argument& e) {
    return config_error(e.what(), out);
  }
  if (!sol.usable()) return config_error("infeasible parameters", out);
  const SystemParams p = sol.params(3, 1);
  if (p.u_tilde >= p.d) return config_error("the attack needs u_tilde < d", out);

  const std::uint64_t round = attack_round(p.u_tilde, sol.P_min, p.theta);
  const TimePoint horizon = c.horizon.value_or(attack_horizon(p, round));
  BehaviorFactory behavior;
  try {
    behavior = make_attack_behavior(c.behavior, p);
  } catch (const std::invalid_argument& e) {
    return config_error(e.what(), out);
  }

  ExecutionTriple triple;
  try {
    triple = build_execution_triple_with_retry(behavior, p, horizon);
  } catch (const ModelViolation& e) {
    out << "attack aborted: " << e.what() << "\n";
    Json report{{"error", e.what()}, {"passed", false}};
    write_report(c, report);
    return CommandResult{kConformanceFailure, report};
  }
  LowerBoundReport lb;
  try {
    lb = verify_lower_bound(triple, round);
  } catch (const std::runtime_error& e) {
    return config_error(e.what(), out);
  }
  Json report = to_json(lb, triple);
  report["behavior"] = c.behavior;
  report["passed"] = lb.passed();

  if (!c.trace_out.empty()) {
    const std::filesystem::path base(c.trace_out);
    for (std::size_t a = 0; a < 3; ++a) {
      std::filesystem::path path = base;
      path.replace_filename(base.stem().string() + ".ex" + std::to_string(a) + base.extension().string());
      auto f = open_trace(path.string());
      write_trace_jsonl(triple.executions[a], f);
    }
  }

  out << "behavior=" << c.behavior << " r*=" << round << " breakpoint=" << to_decimal(lb.breakpoint, 4)
      << " faulty messages=" << triple.faulty_messages << "\n";
  for (std::size_t a = 0; a < 3; ++a) row(out, "skew Ex" + std::to_string(a), lb.skews[a]);
  row(out, "sum", lb.sum);
  row(out, "2 u_tilde", Rational(2 * p.u_tilde));
  row(out, "max skew", lb.max_skew);
  row(out, "2 u_tilde / 3", Rational(2 * p.u_tilde / 3));
  out << "  views equal        " << (lb.indistinguishability_ok ? "yes" : "NO") << "\n";
  out << "  audits             " << (lb.audits_ok ? "clean" : "FAILED") << "\n";
  for (const auto& f : triple.audit_failures) out << "      " << f << "\n";
  out << (lb.passed() ? "PASS" : "FAIL") << "\n";
  write_report(c, report);
  return CommandResult{lb.passed() ? kPass : kConformanceFailure, report};
}

CommandResult run_command(const ExperimentConfig& c, std::ostream& out) {
  try {
    if (c.mode == "params") return cmd_params(c, out);
    if (c.mode == "simulate") return cmd_simulate(c, out);
    if (c.mode == "apa") return cmd_apa(c, out);
    if (c.mode == "attack") return cmd_attack(c, out);
  } catch (const ConfigError& e) {
    return config_error(e.what(), out);
  }
  return config_error("unknown mode '" + c.mode + "'", out);
}

}  // namespace pulsesync::cli
