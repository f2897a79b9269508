#include "pulsesync/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace pulsesync {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

std::uint64_t parse_count(const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
  }
  return std::stoull(v);
}

std::vector<NodeId> parse_ids(const std::string& v) {
  std::vector<NodeId> ids;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) ids.push_back(static_cast<NodeId>(parse_count(item)));
  }
  return ids;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> s{
      {"mode", [](auto& c, const auto& v) { c.mode = v; }},
      {"n", [](auto& c, const auto& v) { c.n = parse_count(v); }},
      {"f", [](auto& c, const auto& v) { c.f = parse_count(v); }},
      {"d", [](auto& c, const auto& v) { c.d = parse_rational(v); }},
      {"u", [](auto& c, const auto& v) { c.u = parse_rational(v); }},
      {"u_tilde", [](auto& c, const auto& v) { c.u_tilde = parse_rational(v); }},
      {"theta", [](auto& c, const auto& v) { c.theta = parse_rational(v); }},
      {"t_scale", [](auto& c, const auto& v) { c.t_scale = parse_rational(v); }},
      {"adversary", [](auto& c, const auto& v) { c.adversary = v; }},
      {"shift", [](auto& c, const auto& v) { c.shift = parse_rational(v); }},
      {"spread", [](auto& c, const auto& v) { c.spread = parse_rational(v); }},
      {"corrupted", [](auto& c, const auto& v) { c.corrupted = parse_ids(v); }},
      {"clocks", [](auto& c, const auto& v) { c.clocks = v; }},
      {"delays", [](auto& c, const auto& v) { c.delays = v; }},
      {"seed", [](auto& c, const auto& v) { c.seed = parse_count(v); }},
      {"pulses", [](auto& c, const auto& v) { c.pulses = parse_count(v); }},
      {"horizon", [](auto& c, const auto& v) { c.horizon = parse_rational(v); }},
      {"trace_out", [](auto& c, const auto& v) { c.trace_out = v; }},
      {"report_out", [](auto& c, const auto& v) { c.report_out = v; }},
      {"values", [](auto& c, const auto& v) { c.values = parse_rational_list(v); }},
      {"epsilon", [](auto& c, const auto& v) { c.epsilon = parse_rational(v); }},
      {"value_spread", [](auto& c, const auto& v) { c.value_spread = parse_rational(v); }},
      {"behavior", [](auto& c, const auto& v) { c.behavior = v; }},
  };
  return s;
}

}  // namespace

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_rational(item));
  }
  return out;
}

std::string format_rational_list(const std::vector<Rational>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ",";
    s += format_rational(values[i]);
  }
  return s;
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  ExperimentConfig c = std::move(base);
  std::stringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(number) + ": unknown key '" + key + "'");
    try {
      it->second(c, value);
    } catch (const std::exception& e) {
      throw ConfigError("line " + std::to_string(number) + " (" + key + "): " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto str = [&](const char* k, const std::string& v) { out << k << " = \"" << v << "\"\n"; };
  auto num = [&](const char* k, std::uint64_t v) { out << k << " = " << v << "\n"; };
  auto q = [&](const char* k, const Rational& v) { str(k, format_rational(v)); };
  str("mode", c.mode);
  num("n", c.n);
  num("f", c.f);
  q("d", c.d);
  q("u", c.u);
  if (c.u_tilde) q("u_tilde", *c.u_tilde);
  q("theta", c.theta);
  q("t_scale", c.t_scale);
  str("adversary", c.adversary);
  if (c.shift) q("shift", *c.shift);
  if (c.spread) q("spread", *c.spread);
  if (c.corrupted) {
    std::string ids;
    for (std::size_t i = 0; i < c.corrupted->size(); ++i) ids += (i ? "," : "") + std::to_string((*c.corrupted)[i]);
    str("corrupted", ids);
  }
  str("clocks", c.clocks);
  str("delays", c.delays);
  num("seed", c.seed);
  num("pulses", c.pulses);
  if (c.horizon) q("horizon", *c.horizon);
  str("trace_out", c.trace_out);
  str("report_out", c.report_out);
  str("values", format_rational_list(c.values));
  q("epsilon", c.epsilon);
  if (c.value_spread) q("value_spread", *c.value_spread);
  str("behavior", c.behavior);
  return out.str();
}

NodeSet corrupted_nodes(const ExperimentConfig& c) {
  if (c.corrupted) return NodeSet(c.corrupted->begin(), c.corrupted->end());
  NodeSet s;
  for (std::size_t k = 0; k < c.f && k < c.n; ++k) s.insert(static_cast<NodeId>(c.n - 1 - k));
  return s;
}

std::vector<ClockSchedule> preset_clocks(const std::string& name, const SystemParams& p) {
  std::vector<ClockSchedule> clocks(p.n, ClockSchedule::identity());
  if (name == "identity") return clocks;
  if (name == "extremes" || name == "staggered") {
    if (p.n > 1) clocks[1] = ClockSchedule::constant_rate(p.theta);
    if (name == "staggered") {
      for (NodeId v = 0; v < p.n; ++v) {
        const Rational offset = p.S * static_cast<long>(v) / static_cast<long>(p.n);
        clocks[v] = ClockSchedule::constant_rate(v == 1 ? p.theta : Rational(1), offset);
      }
    }
    return clocks;
  }
  if (name == "spread") {
    for (NodeId v = 0; v < p.n; ++v) {
      const Rational rate = p.n > 1 ? Rational(1 + (p.theta - 1) * static_cast<long>(v) / static_cast<long>(p.n - 1))
                                    : Rational(1);
      clocks[v] = ClockSchedule::constant_rate(rate);
    }
    return clocks;
  }
  throw ConfigError("unknown clock preset '" + name + "'");
}

std::unique_ptr<DelayPolicy> preset_delays(const std::string& name, const SystemParams& p, std::uint64_t seed) {
  if (name == "max") return std::make_unique<FixedDelay>(p.d);
  if (name == "min") return std::make_unique<ClassDelay>(Rational(p.d - p.u), Rational(p.d - p.u_tilde));
  if (name == "random") return std::make_unique<RandomInBand>(p, seed);
  if (name == "split") return std::make_unique<SplitDelay>(p, static_cast<NodeId>(p.n / 2));
  throw ConfigError("unknown delay preset '" + name + "'");
}

}  // namespace pulsesync
