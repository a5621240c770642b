#include "drcsim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "drcsim/rng.hpp"

namespace drcsim {

void EpsilonSchedule::validate() const {
  if (!(eps_min >= 0.0 && eps_min <= eps0 && eps0 <= 1.0)) {
    throw std::invalid_argument("epsilon schedule requires 0 <= epsilon.min <= epsilon.start <= 1");
  }
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw std::invalid_argument("epsilon.decay must be in (0, 1]");
  }
}

void QLearningConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("ql.alpha must be in (0, 1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("ql.gamma must be in (0, 1)");
  if (!std::isfinite(initial_value)) throw std::invalid_argument("ql.initial_value must be finite");
  epsilon.validate();
}

double epsilon_at(const EpsilonSchedule& sched, int episode) {
  double eps = sched.eps0 * std::pow(sched.decay, episode);
  return std::max(sched.eps_min, eps);
}

Action epsilon_greedy(const std::array<double, kNumActions>& q, double eps,
                      std::mt19937_64& rng) {
  if (eps > 0.0 && uniform01(rng) < eps) {
    return action_from_index(static_cast<int>(uniform_below(rng, kNumActions)));
  }
  return greedy_action(q);
}

Action greedy_action(const std::array<double, kNumActions>& q) {
  int best = 0;
  for (int a = 1; a < kNumActions; ++a) {
    if (q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
  }
  return action_from_index(best);
}

Action RoundRobinAgent::act(const State&, bool) {
  const Action a = (counter_ % 2 == 0) ? Action::Communicate : Action::Radar;
  ++counter_;
  return a;
}

void RoundRobinAgent::save_policy(std::ostream& out) const {
  out << "round_robin\n";
}

QTable::QTable(int queue_capacity, double initial_value)
    : queue_capacity_(queue_capacity) {
  if (queue_capacity < 0) throw std::invalid_argument("qtable: queue capacity must be >= 0");
  values_.assign(state_count(queue_capacity) * kNumActions, initial_value);
}

double QTable::get(const State& s, Action a) const {
  return values_[state_index(s, queue_capacity_) * kNumActions +
                 static_cast<std::size_t>(action_index(a))];
}

void QTable::set(const State& s, Action a, double v) {
  values_[state_index(s, queue_capacity_) * kNumActions +
          static_cast<std::size_t>(action_index(a))] = v;
}

std::array<double, kNumActions> QTable::row(const State& s) const {
  const std::size_t base = state_index(s, queue_capacity_) * kNumActions;
  std::array<double, kNumActions> out{};
  for (int a = 0; a < kNumActions; ++a) out[static_cast<std::size_t>(a)] = values_[base + a];
  return out;
}

double& QTable::at(std::size_t state_idx, int action_idx) {
  return values_.at(state_idx * kNumActions + static_cast<std::size_t>(action_idx));
}

double QTable::at(std::size_t state_idx, int action_idx) const {
  return values_.at(state_idx * kNumActions + static_cast<std::size_t>(action_idx));
}

void QTable::save(std::ostream& out) const {
  // One row per state_index, one column per action.
  out << "qtable v1 " << queue_capacity_ << ' ' << values_.size() / kNumActions << '\n';
  char buf[64];
  for (std::size_t i = 0; i < values_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", values_[i]);
    out << buf << (i % kNumActions + 1 == kNumActions ? '\n' : ' ');
  }
}

QTable QTable::load(std::istream& in) {
  std::string tag, version;
  int capacity = 0;
  std::size_t states = 0;
  if (!(in >> tag >> version >> capacity >> states) || tag != "qtable" || version != "v1") {
    throw std::runtime_error("qtable load: bad header");
  }
  QTable table(capacity);
  if (states * kNumActions != table.values_.size()) {
    throw std::runtime_error("qtable load: size mismatch");
  }
  for (auto& v : table.values_) {
    if (!(in >> v)) throw std::runtime_error("qtable load: truncated values");
  }
  return table;
}

void q_update(QTable& table, const Transition& t, double alpha, double gamma) {
  const auto next_row = table.row(t.next);
  const double best_next = *std::max_element(next_row.begin(), next_row.end());
  const double target = t.reward + gamma * best_next;
  const double old = table.get(t.s, t.a);
  table.set(t.s, t.a, old + alpha * (target - old));
}

QLearningAgent::QLearningAgent(const QLearningConfig& cfg, int queue_capacity,
                               std::uint64_t seed)
    : cfg_((cfg.validate(), cfg)),
      table_(queue_capacity, cfg.initial_value),
      explore_rng_(make_rng(seed, RngStream::AgentExplore)) {}

Action QLearningAgent::act(const State& s, bool explore) {
  const double eps = explore ? epsilon_at(cfg_.epsilon, episode_) : 0.0;
  return epsilon_greedy(table_.row(s), eps, explore_rng_);
}

void QLearningAgent::observe(const Transition& t) {
  q_update(table_, t, cfg_.alpha, cfg_.gamma);
}

void QLearningAgent::end_episode() { ++episode_; }

double QLearningAgent::current_epsilon() const { return epsilon_at(cfg_.epsilon, episode_); }

void QLearningAgent::load_table(QTable table) {
  if (table.queue_capacity() != table_.queue_capacity()) {
    throw std::invalid_argument("qtable load: queue capacity mismatch");
  }
  table_ = std::move(table);
}

void QLearningAgent::save_policy(std::ostream& out) const { table_.save(out); }

}  // namespace drcsim
