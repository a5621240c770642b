#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "drcsim/env.hpp"

namespace drcsim {

// Exponentially decaying exploration rate with a floor.
struct EpsilonSchedule {
  double eps0 = 1.0;
  double decay = 0.99;
  double eps_min = 0.01;

  void validate() const;  // 0 <= eps_min <= eps0 <= 1, 0 < decay <= 1
};

// Exploration rate in effect during the given training episode (0-based).
double epsilon_at(const EpsilonSchedule& sched, int episode);

// Standard epsilon-greedy over two action values. Draws the gate variable
// only when eps > 0, so a greedy call (eps == 0) consumes no randomness.
// Ties between action values resolve to the lower action index.
Action epsilon_greedy(const std::array<double, kNumActions>& q, double eps,
                      std::mt19937_64& rng);

// Greedy argmax with ties to the lower action index.
Action greedy_action(const std::array<double, kNumActions>& q);

// Common interface for the decision policies under comparison.
class Agent {
 public:
  virtual ~Agent() = default;

  // Pick an action for the given state. `explore` enables the agent's
  // exploration mechanism; evaluation passes false.
  virtual Action act(const State& s, bool explore) = 0;

  // Learn from one transition. No-op for non-learning agents.
  virtual void observe(const Transition& t) = 0;

  // Episode boundary: advance schedules, reset per-episode state.
  virtual void end_episode() = 0;

  virtual std::string kind() const = 0;

  // Human/machine-readable dump of the learned policy (best effort).
  virtual void save_policy(std::ostream& out) const = 0;
};

// Alternates communicate / radar / communicate / ... within each episode.
class RoundRobinAgent : public Agent {
 public:
  Action act(const State& s, bool explore) override;
  void observe(const Transition&) override {}
  void end_episode() override { counter_ = 0; }
  std::string kind() const override { return "roundrobin"; }
  void save_policy(std::ostream& out) const override;

 private:
  long counter_ = 0;
};

// Dense state-action value table over the finite state space.
class QTable {
 public:
  QTable(int queue_capacity, double initial_value = 0.0);

  int queue_capacity() const { return queue_capacity_; }
  std::size_t size() const { return values_.size(); }

  double get(const State& s, Action a) const;
  void set(const State& s, Action a, double v);
  std::array<double, kNumActions> row(const State& s) const;

  double& at(std::size_t state_idx, int action_idx);
  double at(std::size_t state_idx, int action_idx) const;

  void save(std::ostream& out) const;
  static QTable load(std::istream& in);

  bool operator==(const QTable&) const = default;

 private:
  int queue_capacity_;
  std::vector<double> values_;  // [state_index * kNumActions + action]
};

// One tabular Q-learning backup:
//   Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))
void q_update(QTable& table, const Transition& t, double alpha, double gamma);

struct QLearningConfig {
  double alpha = 0.1;
  double gamma = 0.99;
  EpsilonSchedule epsilon;
  double initial_value = 0.0;

  void validate() const;  // alpha in (0,1], gamma in (0,1)
};

class QLearningAgent : public Agent {
 public:
  QLearningAgent(const QLearningConfig& cfg, int queue_capacity, std::uint64_t seed);

  Action act(const State& s, bool explore) override;
  void observe(const Transition& t) override;
  void end_episode() override;
  std::string kind() const override { return "qlearning"; }
  void save_policy(std::ostream& out) const override;

  const QTable& table() const { return table_; }
  int episode() const { return episode_; }
  double current_epsilon() const;

  // Replace the value table (e.g. with one from a policy file); the table's
  // queue capacity must match this agent's.
  void load_table(QTable table);

 private:
  QLearningConfig cfg_;
  QTable table_;
  std::mt19937_64 explore_rng_;
  int episode_ = 0;
};

}  // namespace drcsim
