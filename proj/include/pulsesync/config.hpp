// Experiment configuration: a flat `key = value` text file.
//
//   mode = "simulate"
//   theta = "101/100"
//   n = 4
//
// Strings may be quoted; rationals are written "num/den" so they survive a
// round trip exactly. Lines starting with '#' are comments.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulsesync/core.hpp"
#include "pulsesync/des.hpp"
#include "pulsesync/params.hpp"

namespace pulsesync {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string mode = "simulate";  // params | simulate | apa | attack

  std::size_t n = 4;
  std::size_t f = 1;
  Rational d{1};
  Rational u{1, 10};
  std::optional<Rational> u_tilde;
  Rational theta{101, 100};
  Rational t_scale{1};

  std::string adversary = "silent";
  std::optional<Rational> shift;
  std::optional<Rational> spread;
  /// Defaults to the f highest ids.
  std::optional<std::vector<NodeId>> corrupted;

  std::string clocks = "extremes";  // identity | extremes | spread | staggered
  std::string delays = "random";    // max | min | random | split
  std::uint64_t seed = 1;
  std::uint64_t pulses = 100;
  std::optional<Rational> horizon;

  std::string trace_out;
  std::string report_out;

  // apa
  std::vector<Rational> values;
  Rational epsilon{1, 8};
  std::optional<Rational> value_spread;

  // attack
  std::string behavior = "cps";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Applies `text` on top of `base`. Throws ConfigError naming the line on
/// malformed input or unknown keys.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
/// Every set field, one per line, in a fixed order.
std::string serialize_config(const ExperimentConfig& config);

std::vector<Rational> parse_rational_list(const std::string& text);
std::string format_rational_list(const std::vector<Rational>& values);

/// The corrupted set the config selects.
NodeSet corrupted_nodes(const ExperimentConfig& config);

/// Clock presets. extremes: node 0 at rate 1, node 1 at rate theta, the rest
/// at 1. spread: rates evenly spaced over [1, theta]. staggered: extremes
/// rates, node v starts with offset v*S/n.
std::vector<ClockSchedule> preset_clocks(const std::string& name, const SystemParams& params);

/// max: every delay d; min: every delay at the band minimum; random: seeded
/// uniform grid over the band; split: receivers below n/2 fast, the rest slow.
std::unique_ptr<DelayPolicy> preset_delays(const std::string& name, const SystemParams& params, std::uint64_t seed);

}  // namespace pulsesync
