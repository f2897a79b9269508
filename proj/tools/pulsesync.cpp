// pulsesync: parameter solver, CPS simulator, APA runner and lower-bound attack.
//
//   pulsesync params --theta 101/100 --d 1 --u 1/1000
//   pulsesync simulate --n 4 --f 1 --adversary echo_rusher --pulses 100
//   pulsesync apa --n 5 --f 2 --adversary equivocator --epsilon 1/1024
//   pulsesync attack --u-tilde 3/10 --behavior cps --report attack.json
//
// Exit codes: 0 pass, 1 conformance failure, 2 configuration error.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

using pulsesync::ExperimentConfig;
namespace cli = pulsesync::cli;

namespace {

// Config keys exposed as --flags (underscores become dashes).
const char* const kKeys[] = {"n",       "f",         "d",          "u",         "u_tilde",  "theta",
                             "t_scale", "adversary", "shift",      "spread",    "corrupted", "clocks",
                             "delays",  "seed",      "pulses",     "horizon",   "values",   "epsilon",
                             "value_spread", "behavior"};

struct Flags {
  std::string config;
  std::string save_config;
  std::string trace;
  std::string report;
  std::map<std::string, std::string> values;
};

void add_flags(CLI::App* sub, Flags& flags) {
  sub->add_option("--config", flags.config, "key = value config file");
  sub->add_option("--save-config", flags.save_config, "write the effective config here");
  sub->add_option("--trace", flags.trace, "trace output (JSONL)");
  sub->add_option("--report", flags.report, "report output (JSON)");
  for (const char* key : kKeys) {
    std::string flag = std::string("--") + key;
    for (char& ch : flag) {
      if (ch == '_') ch = '-';
    }
    sub->add_option(flag, flags.values[key]);
  }
}

ExperimentConfig defaults_for(const std::string& mode) {
  ExperimentConfig c;
  c.mode = mode;
  if (mode == "attack") {
    c.n = 3;
    c.f = 1;
    c.u = 0;
    c.u_tilde = pulsesync::Rational(3, 10);
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signature-based Byzantine pulse synchronization toolkit"};
  app.require_subcommand(1);
  Flags flags;
  for (const char* name : {"params", "simulate", "apa", "attack"}) {
    add_flags(app.add_subcommand(name, std::string("run ") + name), flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }
  const std::string mode = app.get_subcommands().front()->get_name();

  ExperimentConfig config;
  try {
    config = defaults_for(mode);
    if (!flags.config.empty()) config = pulsesync::load_config(flags.config, config);
    std::string overrides;
    for (const auto& [key, value] : flags.values) {
      if (!value.empty()) overrides += key + " = " + value + "\n";
    }
    config = pulsesync::parse_config(overrides, config);
    config.mode = mode;
    if (!flags.trace.empty()) config.trace_out = flags.trace;
    if (!flags.report.empty()) config.report_out = flags.report;
    if (!flags.save_config.empty()) {
      std::ofstream out(flags.save_config);
      out << pulsesync::serialize_config(config);
    }
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return cli::kConfigError;
  }
  return cli::run_command(config, std::cout).code;
}
