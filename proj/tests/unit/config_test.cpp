#include <gtest/gtest.h>

#include "pulsesync/config.hpp"

namespace pulsesync {
namespace {

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig c;
  EXPECT_EQ(parse_config(serialize_config(c)), c);
}

TEST(Config, EveryFieldRoundTrips) {
  ExperimentConfig c;
  c.mode = "attack";
  c.n = 3;
  c.f = 1;
  c.d = make_rational(3, 2);
  c.u = make_rational(1, 7);
  c.u_tilde = make_rational(2, 7);
  c.theta = make_rational(1001, 1000);
  c.t_scale = 2;
  c.adversary = "echo_rusher";
  c.shift = make_rational(-1, 3);
  c.spread = make_rational(1, 9);
  c.corrupted = std::vector<NodeId>{0, 2};
  c.clocks = "staggered";
  c.delays = "split";
  c.seed = 987654321;
  c.pulses = 12;
  c.horizon = 99;
  c.trace_out = "out dir/t.jsonl";
  c.report_out = "r.json";
  c.values = {0, make_rational(1, 3), -1};
  c.epsilon = make_rational(1, 1024);
  c.value_spread = 5;
  c.behavior = "free_running";
  const ExperimentConfig back = parse_config(serialize_config(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_config(back), serialize_config(c));
}

TEST(Config, CommentsDecimalsAndOverlay) {
  ExperimentConfig base;
  base.n = 7;
  const auto c = parse_config("# comment\n\ntheta = 1.01\n  f = 2\n", base);
  EXPECT_EQ(c.theta, make_rational(101, 100));
  EXPECT_EQ(c.f, 2u);
  EXPECT_EQ(c.n, 7u);
}

TEST(Config, ErrorsNameTheLine) {
  try {
    parse_config("n = 4\nbogus = 1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  EXPECT_THROW(parse_config("n 4"), ConfigError);
  EXPECT_THROW(parse_config("n = -4"), ConfigError);
  EXPECT_THROW(parse_config("theta = x"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/cfg"), ConfigError);
}

TEST(Config, CorruptedDefaultsToHighestIds) {
  ExperimentConfig c;
  c.n = 7;
  c.f = 3;
  EXPECT_EQ(corrupted_nodes(c), (NodeSet{4, 5, 6}));
  c.corrupted = std::vector<NodeId>{0};
  EXPECT_EQ(corrupted_nodes(c), (NodeSet{0}));
}

TEST(Config, Presets) {
  SystemParams p;
  p.n = 4;
  p.f = 1;
  p.d = 1;
  p.u = make_rational(1, 10);
  p.u_tilde = make_rational(1, 5);
  p.theta = make_rational(11, 10);
  p.S = 1;
  const auto spread = preset_clocks("spread", p);
  EXPECT_EQ(spread[0].max_rate(), 1);
  EXPECT_EQ(spread[3].max_rate(), p.theta);
  EXPECT_EQ(preset_clocks("staggered", p)[2].initial_offset(), make_rational(1, 2));
  EXPECT_THROW(preset_clocks("wobbly", p), ConfigError);
  EXPECT_THROW(preset_delays("wobbly", p, 1), ConfigError);
  auto min = preset_delays("min", p, 1);
  Message m;
  EXPECT_EQ(min->delay(LinkSend{0, 1, 0, &m, false}), make_rational(9, 10));
  EXPECT_EQ(min->delay(LinkSend{0, 3, 0, &m, true}), make_rational(4, 5));
}

}  // namespace
}  // namespace pulsesync
