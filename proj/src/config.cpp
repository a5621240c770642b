#include "drcsim/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace drcsim {

namespace {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string text{trim(value)};
  if (text.empty()) throw ConfigError(std::string(key) + ": empty value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": '" + text + "' is not a finite number");
  }
  return v;
}

long long parse_int(std::string_view key, std::string_view value) {
  const std::string text{trim(value)};
  if (text.empty()) throw ConfigError(std::string(key) + ": empty value");
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw ConfigError(std::string(key) + ": '" + text + "' is not an integer");
  }
  return v;
}

std::uint64_t parse_uint64(std::string_view key, std::string_view value) {
  const std::string text{trim(value)};
  if (text.empty()) throw ConfigError(std::string(key) + ": empty value");
  if (text.front() == '-') {
    throw ConfigError(std::string(key) + ": '" + text + "' is not a non-negative integer");
  }
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw ConfigError(std::string(key) + ": '" + text + "' is not a non-negative integer");
  }
  return v;
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::string_view piece =
        comma == std::string_view::npos ? value.substr(start) : value.substr(start, comma - start);
    parts.emplace_back(trim(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

template <typename T>
std::string join_list(const std::vector<T>& values, const std::function<std::string(T)>& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += fmt(values[i]);
  }
  return out;
}

struct KeyDef {
  std::string name;
  std::function<void(FullConfig&, std::string_view)> set;
  std::function<std::string(const FullConfig&)> get;
  bool numeric = false;  // usable as a sweep parameter
};

using DoubleRef = std::function<double&(FullConfig&)>;
using IntRef = std::function<int&(FullConfig&)>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bounds are inclusive unless the matching *_open flag is set. `range_text`
// is the human-readable legal range quoted in errors.
KeyDef double_key(std::string name, DoubleRef ref, double lo, double hi, bool lo_open,
                  bool hi_open, std::string range_text) {
  KeyDef def;
  def.name = name;
  def.numeric = true;
  def.set = [name, ref, lo, hi, lo_open, hi_open, range_text](FullConfig& cfg,
                                                              std::string_view value) {
    const double v = parse_double(name, value);
    const bool lo_ok = lo_open ? v > lo : v >= lo;
    const bool hi_ok = hi_open ? v < hi : v <= hi;
    if (!lo_ok || !hi_ok) {
      throw ConfigError(name + " must be " + range_text + " (got " + format_g17(v) + ")");
    }
    ref(cfg) = v;
  };
  def.get = [ref](const FullConfig& cfg) {
    return format_g17(ref(const_cast<FullConfig&>(cfg)));
  };
  return def;
}

KeyDef int_key(std::string name, IntRef ref, long long lo, long long hi) {
  KeyDef def;
  def.name = name;
  def.numeric = true;
  def.set = [name, ref, lo, hi](FullConfig& cfg, std::string_view value) {
    const long long v = parse_int(name, value);
    if (v < lo || v > hi) {
      throw ConfigError(name + " must be in [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "] (got " + std::to_string(v) + ")");
    }
    ref(cfg) = static_cast<int>(v);
  };
  def.get = [ref](const FullConfig& cfg) {
    return std::to_string(ref(const_cast<FullConfig&>(cfg)));
  };
  return def;
}

std::vector<KeyDef> build_registry() {
  std::vector<KeyDef> defs;
  auto add = [&defs](KeyDef def) { defs.push_back(std::move(def)); };

  // --- environment ---
  add(int_key("env.queue_capacity", [](FullConfig& c) -> int& { return c.run.env.queue_capacity; },
              1, 1000000));
  add(double_key("env.arrival_rate", [](FullConfig& c) -> double& { return c.run.env.arrival_rate; },
                 0.0, 1e6, true, false, "> 0 and <= 1e+06"));
  add(int_key("env.tx_good", [](FullConfig& c) -> int& { return c.run.env.tx_good; }, 0, 1000000));
  add(int_key("env.tx_bad", [](FullConfig& c) -> int& { return c.run.env.tx_bad; }, 0, 1000000));
  add(double_key("env.p_bad_channel",
                 [](FullConfig& c) -> double& { return c.run.env.p_bad_channel; }, 0.0, 1.0, false,
                 false, "in [0, 1]"));
  for (int i = 0; i < kNumFactors; ++i) {
    const std::string f = kFactorNames[i];
    add(double_key("env.factors.p0." + f,
                   [i](FullConfig& c) -> double& { return c.run.env.factors.p0[i]; }, 0.0, 1.0,
                   false, false, "in [0, 1]"));
  }
  for (int i = 0; i < kNumFactors; ++i) {
    const std::string f = kFactorNames[i];
    add(double_key("env.factors.p1." + f,
                   [i](FullConfig& c) -> double& { return c.run.env.factors.p1[i]; }, 0.0, 1.0,
                   false, false, "in [0, 1]"));
  }
  for (int i = 0; i < kNumFactors; ++i) {
    const std::string f = kFactorNames[i];
    add(double_key("env.factors.tau." + f,
                   [i](FullConfig& c) -> double& { return c.run.env.factors.tau[i]; }, 0.0, 1.0,
                   false, false, "in [0, 1]"));
  }
  add(double_key("env.rewards.r1", [](FullConfig& c) -> double& { return c.run.env.rewards.r1; },
                 0.0, kInf, false, true, ">= 0"));
  add(double_key("env.rewards.r2", [](FullConfig& c) -> double& { return c.run.env.rewards.r2; },
                 0.0, kInf, false, true, ">= 0"));
  add(double_key("env.rewards.r3", [](FullConfig& c) -> double& { return c.run.env.rewards.r3; },
                 0.0, kInf, false, true, ">= 0"));
  add(double_key("env.rewards.r4", [](FullConfig& c) -> double& { return c.run.env.rewards.r4; },
                 0.0, kInf, false, true, ">= 0"));

  // --- agent selection ---
  {
    KeyDef def;
    def.name = "agent";
    def.set = [](FullConfig& cfg, std::string_view value) {
      try {
        cfg.run.agent = agent_kind_from_name(std::string(trim(value)));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("agent: ") + e.what());
      }
    };
    def.get = [](const FullConfig& cfg) { return agent_kind_name(cfg.run.agent); };
    add(std::move(def));
  }

  // --- tabular Q-learning ---
  add(double_key("ql.alpha", [](FullConfig& c) -> double& { return c.run.ql.alpha; }, 0.0, 1.0,
                 true, false, "in (0, 1]"));
  add(double_key("ql.gamma", [](FullConfig& c) -> double& { return c.run.ql.gamma; }, 0.0, 1.0,
                 true, true, "in (0, 1)"));
  add(double_key("ql.initial_value",
                 [](FullConfig& c) -> double& { return c.run.ql.initial_value; }, -1e9, 1e9, false,
                 false, "in [-1e+09, 1e+09]"));

  // --- DQN ---
  add(double_key("dqn.alpha", [](FullConfig& c) -> double& { return c.run.dqn.alpha; }, 0.0, 1e3,
                 true, false, "> 0 and <= 1000"));
  add(double_key("dqn.gamma", [](FullConfig& c) -> double& { return c.run.dqn.gamma; }, 0.0, 1.0,
                 true, true, "in (0, 1)"));
  add(int_key("dqn.hidden1", [](FullConfig& c) -> int& { return c.run.dqn.hidden1; }, 1, 4096));
  add(int_key("dqn.hidden2", [](FullConfig& c) -> int& { return c.run.dqn.hidden2; }, 1, 4096));
  add(int_key("dqn.memory_capacity",
              [](FullConfig& c) -> int& { return c.run.dqn.memory_capacity; }, 1, 100000000));
  add(int_key("dqn.batch_size", [](FullConfig& c) -> int& { return c.run.dqn.batch_size; }, 1,
              1000000));
  add(int_key("dqn.target_sync_interval",
              [](FullConfig& c) -> int& { return c.run.dqn.target_sync_interval; }, 1,
              1000000000));
  add(int_key("dqn.warmup", [](FullConfig& c) -> int& { return c.run.dqn.warmup; }, 1, 100000000));

  // --- shared exploration schedule ---
  add(double_key("epsilon.start", [](FullConfig& c) -> double& { return c.run.epsilon.eps0; }, 0.0,
                 1.0, false, false, "in [0, 1]"));
  add(double_key("epsilon.decay", [](FullConfig& c) -> double& { return c.run.epsilon.decay; },
                 0.0, 1.0, true, false, "in (0, 1]"));
  add(double_key("epsilon.min", [](FullConfig& c) -> double& { return c.run.epsilon.eps_min; },
                 0.0, 1.0, false, false, "in [0, 1]"));

  // --- run shape ---
  add(int_key("run.episodes", [](FullConfig& c) -> int& { return c.run.episodes; }, 1, 10000000));
  add(int_key("run.steps_per_episode",
              [](FullConfig& c) -> int& { return c.run.steps_per_episode; }, 1, 10000000));
  add(int_key("run.eval_episodes", [](FullConfig& c) -> int& { return c.run.eval_episodes; }, 1,
              10000000));
  {
    KeyDef def;
    def.name = "run.seeds";
    def.set = [](FullConfig& cfg, std::string_view value) {
      std::vector<std::uint64_t> seeds;
      for (const auto& piece : split_list(value)) {
        if (piece.empty()) throw ConfigError("run.seeds: empty entry in list");
        seeds.push_back(parse_uint64("run.seeds", piece));
      }
      if (seeds.empty()) throw ConfigError("run.seeds must list at least one seed");
      cfg.run.seeds = std::move(seeds);
    };
    def.get = [](const FullConfig& cfg) {
      return join_list<std::uint64_t>(cfg.run.seeds,
                                      [](std::uint64_t s) { return std::to_string(s); });
    };
    add(std::move(def));
  }
  add(int_key("run.metrics_window", [](FullConfig& c) -> int& { return c.run.metrics_window; }, 1,
              10000000));
  add(int_key("run.convergence_window",
              [](FullConfig& c) -> int& { return c.run.convergence_window; }, 1, 10000000));
  add(double_key("run.convergence_tol",
                 [](FullConfig& c) -> double& { return c.run.convergence_tol; }, 0.0, 1e6, true,
                 false, "> 0 and <= 1e+06"));

  // --- sweep section ---
  {
    KeyDef def;
    def.name = "sweep.parameter";
    def.set = [](FullConfig& cfg, std::string_view value) {
      cfg.sweep_parameter = std::string(trim(value));
    };
    def.get = [](const FullConfig& cfg) { return cfg.sweep_parameter; };
    add(std::move(def));
  }
  {
    KeyDef def;
    def.name = "sweep.values";
    def.set = [](FullConfig& cfg, std::string_view value) {
      std::vector<double> values;
      const std::string_view trimmed = trim(value);
      if (!trimmed.empty()) {
        for (const auto& piece : split_list(trimmed)) {
          if (piece.empty()) throw ConfigError("sweep.values: empty entry in list");
          values.push_back(parse_double("sweep.values", piece));
        }
      }
      cfg.sweep_values = std::move(values);
    };
    def.get = [](const FullConfig& cfg) {
      return join_list<double>(cfg.sweep_values, [](double v) { return format_g17(v); });
    };
    add(std::move(def));
  }
  {
    KeyDef def;
    def.name = "sweep.agents";
    def.set = [](FullConfig& cfg, std::string_view value) {
      std::vector<AgentKind> agents;
      for (const auto& piece : split_list(value)) {
        if (piece.empty()) throw ConfigError("sweep.agents: empty entry in list");
        try {
          agents.push_back(agent_kind_from_name(piece));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("sweep.agents: ") + e.what());
        }
      }
      if (agents.empty()) throw ConfigError("sweep.agents must list at least one agent");
      for (std::size_t i = 0; i < agents.size(); ++i) {
        for (std::size_t j = i + 1; j < agents.size(); ++j) {
          if (agents[i] == agents[j]) {
            throw ConfigError("sweep.agents: duplicate agent '" + agent_kind_name(agents[i]) +
                              "'");
          }
        }
      }
      cfg.sweep_agents = std::move(agents);
    };
    def.get = [](const FullConfig& cfg) {
      return join_list<AgentKind>(cfg.sweep_agents,
                                  [](AgentKind k) { return agent_kind_name(k); });
    };
    add(std::move(def));
  }

  return defs;
}

const std::vector<KeyDef>& registry() {
  static const std::vector<KeyDef> defs = build_registry();
  return defs;
}

const KeyDef* find_key(std::string_view name) {
  for (const auto& def : registry()) {
    if (def.name == name) return &def;
  }
  return nullptr;
}

}  // namespace

SweepSpec FullConfig::sweep_spec() const {
  if (!has_sweep()) {
    throw ConfigError("config has no sweep section (set sweep.parameter and sweep.values)");
  }
  SweepSpec spec;
  spec.parameter = sweep_parameter;
  spec.values = sweep_values;
  spec.agents = sweep_agents;
  spec.base = run;
  return spec;
}

void apply_key(FullConfig& cfg, std::string_view key, std::string_view value) {
  const KeyDef* def = find_key(trim(key));
  if (!def) throw ConfigError("unknown key '" + std::string(trim(key)) + "'");
  def->set(cfg, value);
}

std::string get_key(const FullConfig& cfg, std::string_view key) {
  const KeyDef* def = find_key(trim(key));
  if (!def) throw ConfigError("unknown key '" + std::string(trim(key)) + "'");
  return def->get(cfg);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& def : registry()) out.push_back(def.name);
    return out;
  }();
  return names;
}

std::string render_config(const FullConfig& cfg) {
  std::string out;
  for (const auto& def : registry()) {
    out += def.name;
    out += " = ";
    out += def.get(cfg);
    out += '\n';
  }
  return out;
}

void validate_config(const FullConfig& cfg) {
  try {
    cfg.run.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const bool has_param = !cfg.sweep_parameter.empty();
  const bool has_values = !cfg.sweep_values.empty();
  if (has_param != has_values) {
    throw ConfigError(has_param ? "sweep.values must be set when sweep.parameter is set"
                                : "sweep.parameter must be set when sweep.values is set");
  }
  if (has_param) {
    const KeyDef* def = find_key(cfg.sweep_parameter);
    if (!def && !cfg.sweep_parameter.starts_with("env.")) {
      def = find_key("env." + cfg.sweep_parameter);
    }
    if (!def) {
      throw ConfigError("sweep.parameter: unknown key '" + cfg.sweep_parameter + "'");
    }
    if (!def->numeric) {
      throw ConfigError("sweep.parameter: key '" + def->name + "' is not a numeric parameter");
    }
    // Every sweep value must satisfy the swept key's own range and the
    // cross-field invariants.
    for (double value : cfg.sweep_values) {
      FullConfig probe;
      probe.run = cfg.run;
      def->set(probe, format_g17(value));
      try {
        probe.run.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("sweep.values: value " + format_g17(value) + " rejected: " + e.what());
      }
    }
    if (cfg.sweep_agents.empty()) throw ConfigError("sweep.agents must list at least one agent");
  }
}

FullConfig parse_config_text(std::string_view text, std::string_view origin) {
  FullConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    ++line_no;
    const std::string_view line = trim(raw);
    const auto fail = [&](const std::string& message) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + message);
    };
    if (!line.empty() && line.front() != '#') {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) fail("expected 'key = value'");
      const std::string key{trim(line.substr(0, eq))};
      const std::string_view value = trim(line.substr(eq + 1));
      if (key.empty()) fail("missing key before '='");
      if (!seen.insert(key).second) fail("duplicate key '" + key + "'");
      try {
        apply_key(cfg, key, value);
      } catch (const ConfigError& e) {
        fail(e.what());
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  return cfg;
}

FullConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

ExperimentConfig with_sweep_value(const ExperimentConfig& base, const std::string& parameter,
                                  double value) {
  FullConfig cfg;
  cfg.run = base;
  const KeyDef* def = find_key(parameter);
  if (!def && !parameter.starts_with("env.")) def = find_key("env." + parameter);
  if (!def) throw ConfigError("sweep parameter: unknown key '" + parameter + "'");
  if (!def->numeric) {
    throw ConfigError("sweep parameter: key '" + def->name + "' is not a numeric parameter");
  }
  def->set(cfg, format_g17(value));
  return cfg.run;
}

}  // namespace drcsim
