#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drcsim/agents.hpp"
#include "drcsim/dqn.hpp"
#include "drcsim/env.hpp"

namespace drcsim {

enum class AgentKind { RoundRobin, QLearning, Dqn };

inline constexpr AgentKind kAllAgentKinds[] = {AgentKind::RoundRobin, AgentKind::QLearning,
                                               AgentKind::Dqn};

// Canonical names: "roundrobin", "qlearning", "dqn".
std::string agent_kind_name(AgentKind kind);
AgentKind agent_kind_from_name(const std::string& name);  // throws on unknown name

// Everything a single training run needs. The epsilon schedule is shared by
// both learning agents so comparisons isolate the value-function estimator.
struct ExperimentConfig {
  EnvConfig env;
  AgentKind agent = AgentKind::Dqn;
  QLearningConfig ql;
  DQNConfig dqn;
  EpsilonSchedule epsilon;
  int episodes = 500;
  int steps_per_episode = 200;
  int eval_episodes = 100;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int metrics_window = 50;
  int convergence_window = 20;
  double convergence_tol = 0.05;

  void validate() const;  // throws std::invalid_argument naming the field
};

// Builds the configured agent with the shared epsilon schedule applied.
std::unique_ptr<Agent> make_agent(const ExperimentConfig& cfg, std::uint64_t seed);
std::unique_ptr<Agent> make_agent(AgentKind kind, const ExperimentConfig& cfg,
                                  std::uint64_t seed);

struct EpisodeRecord {
  int episode = 0;
  double total_reward = 0.0;
  long packets_sent = 0;
  long events_total = 0;
  long events_missed = 0;
  int steps = 0;
};

enum class Phase { Train, Eval };
std::string phase_name(Phase p);  // "train" / "eval"

// Resets the environment, runs T steps of act -> step (feeding transitions
// back to the agent only when `train` is set), then ends the agent's episode.
EpisodeRecord run_episode(Environment& env, Agent& agent, int steps, bool train);

// Sum of gamma^t * rewards[t].
double discounted_return(std::span<const double> rewards, double gamma);

struct Metrics {
  double throughput = 0.0;      // packets per step
  std::optional<double> miss_detection_probability;  // empty when no events occurred
  double average_reward = 0.0;  // mean per-episode total reward
};

// Aggregates over the last `window` records (1 <= window <= records size).
Metrics compute_metrics(std::span<const EpisodeRecord> records, int window);

struct TrainResult {
  std::unique_ptr<Agent> agent;
  std::vector<EpisodeRecord> train;
  std::vector<EpisodeRecord> eval;
};

// `episodes` exploring episodes followed by `eval_episodes` greedy,
// non-learning episodes, all on one environment seeded from `seed`.
TrainResult train_agent(const ExperimentConfig& cfg, std::uint64_t seed);
TrainResult train_agent(AgentKind kind, const ExperimentConfig& cfg, std::uint64_t seed);

// Sentinel for a series that never settles onto its final plateau.
inline constexpr int kNotConverged = -1;

// Smallest episode e such that every `window`-episode moving average starting
// at e stays within tolerance * |plateau| of the plateau (the mean of the
// final window). Candidates run up to rewards.size() - 2 * window, so the
// in-band stretch must cover at least one window before the plateau window.
int convergence_episode(std::span<const double> rewards, int window, double tolerance);

std::vector<double> episode_rewards(std::span<const EpisodeRecord> records);

struct SeedRun {
  std::uint64_t seed = 0;
  TrainResult result;
};

// One train_agent per configured seed, independent runs (parallel up to
// `threads`), returned in seed-list order.
std::vector<SeedRun> run_seeds(const ExperimentConfig& cfg, int threads);

struct Aggregate {
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Order statistics; even-length median is the midpoint of the middle pair.
Aggregate aggregate_seeds(std::span<const double> values);

struct SweepSpec {
  std::string parameter;                // config key, e.g. "env.factors.p1.v"
  std::vector<double> values;
  std::vector<AgentKind> agents{kAllAgentKinds[0], kAllAgentKinds[1], kAllAgentKinds[2]};
  ExperimentConfig base;
};

struct SweepRow {
  double value = 0.0;
  AgentKind agent = AgentKind::RoundRobin;
  Aggregate average_reward;
  Aggregate throughput;
  std::optional<Aggregate> miss_detection;  // empty when no seed saw an event
};

// Applies `value` to a copy of the base config; supplied by the config layer
// so the harness stays independent of the key registry.
using ApplySweepValue =
    ExperimentConfig (*)(const ExperimentConfig& base, const std::string& parameter,
                         double value);

// Fresh env + agent + full train per (value, agent, seed); metrics over the
// eval window; median/min/max across seeds. Rows ordered value-major, then
// agents in spec order. Deterministic for a fixed spec and seed list.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, ApplySweepValue apply, int threads);

}  // namespace drcsim
