#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "drcsim/agents.hpp"
#include "drcsim/env.hpp"
#include "drcsim/mlp.hpp"

namespace drcsim {

struct DQNConfig {
  double alpha = 0.001;
  double gamma = 0.99;
  int hidden1 = 64;
  int hidden2 = 64;
  int memory_capacity = 10000;
  int batch_size = 32;
  int target_sync_interval = 100;  // in gradient steps
  int warmup = 500;                // stored transitions before training starts
  EpsilonSchedule epsilon;

  void validate() const;
};

// Fixed-capacity transition store. Once full, the oldest entry is
// overwritten first (ring buffer).
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }

  const Transition& operator[](std::size_t i) const { return buffer_[i]; }

  // Uniform sample with replacement of `n` stored transitions.
  std::vector<Transition> sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;  // slot the next push writes to, once full
  std::vector<Transition> buffer_;
};

// Online weights and their periodically frozen copy used for TD targets.
struct OnlineTargetPair {
  Mlp online;
  Mlp target;
};

inline void target_sync(OnlineTargetPair& pair) { pair.target = pair.online; }

// Bootstrap target r + gamma * max_a' Q_target(s', a'). Every step continues
// the control task, so there is no terminal cutoff.
double td_target(const Transition& t, const Mlp& target_net, double gamma,
                 int queue_capacity, MlpWorkspace& ws);

class DQNAgent : public Agent {
 public:
  DQNAgent(const DQNConfig& cfg, int queue_capacity, std::uint64_t seed);

  Action act(const State& s, bool explore) override;
  void observe(const Transition& t) override;
  void end_episode() override;
  std::string kind() const override { return "dqn"; }
  void save_policy(std::ostream& out) const override;

  // One minibatch gradient step; returns the mean sample loss, or nothing
  // when the replay store is still below the warmup threshold.
  std::optional<double> train_step();

  const Mlp& online_net() const { return nets_.online; }
  const Mlp& target_net() const { return nets_.target; }
  const ReplayMemory& replay() const { return replay_; }
  long gradient_steps() const { return step_counter_; }
  int episode() const { return episode_; }
  double current_epsilon() const;

  // Replace the online and target networks (e.g. with weights from a policy
  // file); shape must match the configured architecture.
  void load_weights(const Mlp& net);

 private:
  DQNConfig cfg_;
  int queue_capacity_;
  OnlineTargetPair nets_;
  ReplayMemory replay_;
  std::mt19937_64 explore_rng_;
  std::mt19937_64 sample_rng_;
  MlpWorkspace ws_;
  std::vector<double> grad_;
  long step_counter_ = 0;
  int episode_ = 0;
};

}  // namespace drcsim
