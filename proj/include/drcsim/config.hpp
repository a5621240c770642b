#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "drcsim/harness.hpp"

namespace drcsim {

// Config parse or validation failure; the message carries file/line or key
// context so the CLI can print it verbatim.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A full experiment description: the run itself plus an optional sweep
// section. Defaults reproduce the documented reference setup.
struct FullConfig {
  ExperimentConfig run;
  std::string sweep_parameter;  // config key to vary; empty = no sweep
  std::vector<double> sweep_values;
  std::vector<AgentKind> sweep_agents{AgentKind::RoundRobin, AgentKind::QLearning,
                                      AgentKind::Dqn};

  bool has_sweep() const { return !sweep_parameter.empty() && !sweep_values.empty(); }
  SweepSpec sweep_spec() const;  // throws ConfigError when no sweep is configured
};

// Key-value text format: one `key = value` per line, `#` comments, blank
// lines ignored. Unknown keys, malformed values, out-of-range values, and
// duplicate keys are errors naming the line.
FullConfig parse_config_text(std::string_view text, std::string_view origin = "<config>");
FullConfig parse_config_file(const std::filesystem::path& path);

// Single-key access used by the parser, the sweep, and the manifest writer.
void apply_key(FullConfig& cfg, std::string_view key, std::string_view value);
std::string get_key(const FullConfig& cfg, std::string_view key);
const std::vector<std::string>& config_keys();  // registry order

// Canonical `key = value` rendering of every key in registry order.
// Reparsing the result reproduces `cfg` exactly.
std::string render_config(const FullConfig& cfg);

// Cross-field checks on top of per-key ranges (run invariants, sweep keys,
// every sweep value legal for the swept parameter).
void validate_config(const FullConfig& cfg);

// Sweep hook for the harness: returns a copy of `base` with the swept key set.
ExperimentConfig with_sweep_value(const ExperimentConfig& base, const std::string& parameter,
                                  double value);

}  // namespace drcsim
