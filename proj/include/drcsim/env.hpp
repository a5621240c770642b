#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "drcsim/rng.hpp"

namespace drcsim {

// Binary environment factors, fixed order: road, weather, speed, moving object.
enum Factor : int { kRoad = 0, kWeather = 1, kSpeed = 2, kObject = 3 };
inline constexpr int kNumFactors = 4;
inline constexpr const char* kFactorNames[kNumFactors] = {"r", "w", "v", "m"};

// Per-factor event probabilities. p0[i] applies while factor i is favorable
// (state 0), p1[i] while unfavorable (state 1); tau[i] is the probability the
// factor is favorable on any given step. Requires p0[i] <= p1[i].
struct FactorProbabilities {
  std::array<double, kNumFactors> p0{0.005, 0.005, 0.005, 0.005};
  std::array<double, kNumFactors> p1{0.05, 0.046, 0.1, 0.05};
  std::array<double, kNumFactors> tau{0.9, 0.9, 0.9, 0.9};

  void validate() const;  // throws std::invalid_argument naming the field
};

struct RewardParams {
  double r1 = 2.0;   // communicate, good channel, no event
  double r2 = 1.0;   // communicate, bad channel, no event
  double r3 = 50.0;  // penalty (applied negated) for an event while communicating
  double r4 = 5.0;   // radar detection, scaled by (unfavorable count + 1)

  void validate() const;
};

struct EnvConfig {
  FactorProbabilities factors;
  int queue_capacity = 10;    // packets the data queue can hold
  double arrival_rate = 1.0;  // mean packet arrivals per step
  int tx_good = 4;            // packets served per communication step, good channel
  int tx_bad = 2;             // same, bad channel
  double p_bad_channel = 0.1;
  RewardParams rewards;

  void validate() const;
};

// (d, c, r, w, v, m): queue occupancy, channel state, four factor states.
// Channel and factors are 0 = good/favorable, 1 = bad/unfavorable.
struct State {
  int d = 0;
  int c = 0;
  int r = 0;
  int w = 0;
  int v = 0;
  int m = 0;

  int factor(int i) const;
  void set_factor(int i, int value);
  int unfavorable_count() const { return r + w + v + m; }

  bool operator==(const State&) const = default;
};

enum class Action : int { Communicate = 0, Radar = 1 };

inline constexpr int kNumActions = 2;
inline int action_index(Action a) { return static_cast<int>(a); }
inline Action action_from_index(int i) { return static_cast<Action>(i); }

struct StepOutcome {
  State next_state;
  double reward = 0.0;
  bool event_occurred = false;
  bool event_detected = false;
  int packets_sent = 0;
  int packets_dropped = 0;

  bool operator==(const StepOutcome&) const = default;
};

struct Transition {
  State s;
  Action a = Action::Communicate;
  double reward = 0.0;
  State next;
};

// Everything outside the agent's control, drawn once per step. `event_draw`
// is compared against the current state's event probability by the caller.
struct ExogenousDraw {
  int channel = 0;
  std::array<int, kNumFactors> factor{};
  int arrivals = 0;
  double event_draw = 0.0;
};

// Probability of an unexpected event conditioned on the realized factor
// states: the sum of the four active per-factor terms, clamped to [0, 1].
double event_probability(const FactorProbabilities& f, const State& s);

// The same sum marginalized over tau; a diagnostic quantity, not used for
// per-step sampling.
double mean_event_probability(const FactorProbabilities& f);

// Five-case immediate reward. `unfavorable_count` must be the number of
// unfavorable factors in the state the action was taken in.
double immediate_reward(const RewardParams& r, Action a, int channel, bool event,
                        int unfavorable_count);

struct QueueResult {
  int new_d = 0;
  int packets_sent = 0;
  int packets_dropped = 0;
};

// Serve first (only in communication mode, limited by the current channel),
// then admit arrivals, dropping whatever exceeds capacity.
QueueResult queue_step(int d, Action a, int channel, int arrivals, const EnvConfig& cfg);

// Draw order is fixed: channel, factors r, w, v, m, arrivals, event draw.
ExogenousDraw sample_exogenous(const EnvConfig& cfg, std::mt19937_64& rng);

// Network input: [d / D, c, r, w, v, m].
inline constexpr int kStateFeatures = 6;
std::array<double, kStateFeatures> encode_state(const State& s, int queue_capacity);

// Bijection between states and {0 .. (D+1)*32 - 1}: d-major, then (c,r,w,v,m)
// read as a 5-bit number with c the high bit.
int state_count(int queue_capacity);
int state_index(const State& s, int queue_capacity);
State state_from_index(int index, int queue_capacity);

inline std::array<double, kStateFeatures> encode_state(const State& s, const EnvConfig& cfg) {
  return encode_state(s, cfg.queue_capacity);
}
inline int state_count(const EnvConfig& cfg) { return state_count(cfg.queue_capacity); }
inline int state_index(const State& s, const EnvConfig& cfg) {
  return state_index(s, cfg.queue_capacity);
}
inline State state_from_index(int index, const EnvConfig& cfg) {
  return state_from_index(index, cfg.queue_capacity);
}

// Single-threaded stochastic environment. Owns its random stream; instances
// with equal configs and seeds produce identical trajectories under identical
// action sequences.
class Environment {
 public:
  Environment(EnvConfig cfg, std::uint64_t seed);

  const EnvConfig& config() const { return cfg_; }
  const State& state() const { return state_; }

  // Empty queue, exogenous fields freshly drawn.
  State reset();

  StepOutcome step(Action a);

 private:
  EnvConfig cfg_;
  State state_;
  std::mt19937_64 rng_;
};

}  // namespace drcsim
