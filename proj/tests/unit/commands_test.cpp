#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"

namespace pulsesync::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pulsesync_commands_test";
  fs::create_directories(dir);
  return dir / name;
}

ExperimentConfig base(const std::string& mode) {
  ExperimentConfig c;
  c.mode = mode;
  return c;
}

TEST(Commands, ParamsExitCodes) {
  std::ostringstream out;
  EXPECT_EQ(cmd_params(base("params"), out).code, kPass);
  ExperimentConfig c = base("params");
  c.theta = make_rational(111, 100);
  EXPECT_EQ(cmd_params(c, out).code, kConformanceFailure);
  c.theta = 1;
  EXPECT_EQ(cmd_params(c, out).code, kConfigError);
}

TEST(Commands, SimulateRejectsBadConfiguration) {
  std::ostringstream out;
  ExperimentConfig c = base("simulate");
  c.f = 2;
  EXPECT_EQ(cmd_simulate(c, out).code, kConfigError);
  c = base("simulate");
  c.adversary = "nope";
  EXPECT_EQ(run_command(c, out).code, kConfigError);
  c = base("simulate");
  c.theta = make_rational(9, 8);
  EXPECT_EQ(cmd_simulate(c, out).code, kConfigError);
}

TEST(Commands, SimulatePasses) {
  std::ostringstream out;
  ExperimentConfig c = base("simulate");
  c.pulses = 15;
  c.adversary = "echo_rusher";
  const auto r = cmd_simulate(c, out);
  EXPECT_EQ(r.code, kPass) << out.str();
  EXPECT_EQ(r.report["passed"], true);
}

TEST(Commands, ApaExitCodes) {
  std::ostringstream out;
  ExperimentConfig c = base("apa");
  c.n = 5;
  c.f = 2;
  c.adversary = "equivocator";
  c.epsilon = make_rational(1, 1024);
  EXPECT_EQ(cmd_apa(c, out).code, kPass) << out.str();
  c.f = 3;
  EXPECT_EQ(cmd_apa(c, out).code, kConfigError);
  c.f = 2;
  c.values = {0, 1};
  EXPECT_EQ(cmd_apa(c, out).code, kConfigError);
}

TEST(Commands, AttackDefaultsPassAndWrongShapeIsConfigError) {
  std::ostringstream out;
  ExperimentConfig c = base("attack");
  c.n = 3;
  c.u = 0;
  c.u_tilde = make_rational(3, 10);
  const auto r = cmd_attack(c, out);
  EXPECT_EQ(r.code, kPass) << out.str();
  EXPECT_EQ(r.report["sum"], "3/5");
  c.n = 4;
  EXPECT_EQ(cmd_attack(c, out).code, kConfigError);
}

TEST(Commands, UnknownModeIsConfigError) {
  std::ostringstream out;
  EXPECT_EQ(run_command(base("dance"), out).code, kConfigError);
}

TEST(Commands, SameSeedGivesByteIdenticalFiles) {
  auto run = [](const std::string& tag) {
    ExperimentConfig c = base("simulate");
    c.pulses = 10;
    c.seed = 31;
    c.adversary = "equivocator";
    c.trace_out = scratch(tag + ".jsonl").string();
    c.report_out = scratch(tag + ".json").string();
    std::ostringstream out;
    EXPECT_EQ(cmd_simulate(c, out).code, kPass);
    return std::make_pair(slurp(c.trace_out), slurp(c.report_out));
  };
  const auto a = run("a");
  const auto b = run("b");
  EXPECT_FALSE(a.first.empty());
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

}  // namespace
}  // namespace pulsesync::cli
