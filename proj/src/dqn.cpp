#include "drcsim/dqn.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "drcsim/rng.hpp"

namespace drcsim {

void DQNConfig::validate() const {
  if (alpha <= 0.0) throw std::invalid_argument("dqn.alpha must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("dqn.gamma must be in (0, 1)");
  if (hidden1 <= 0 || hidden2 <= 0) throw std::invalid_argument("dqn hidden sizes must be > 0");
  if (memory_capacity <= 0) throw std::invalid_argument("dqn.memory_capacity must be > 0");
  if (batch_size <= 0) throw std::invalid_argument("dqn.batch_size must be > 0");
  if (batch_size > memory_capacity) {
    throw std::invalid_argument("dqn.batch_size must not exceed dqn.memory_capacity");
  }
  if (target_sync_interval <= 0) throw std::invalid_argument("dqn.target_sync_interval must be > 0");
  if (warmup <= 0) throw std::invalid_argument("dqn.warmup must be > 0");
  epsilon.validate();
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay memory capacity must be > 0");
  buffer_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayMemory::push(const Transition& t) {
  if (buffer_.size() < capacity_) {
    buffer_.push_back(t);
  } else {
    buffer_[next_] = t;
    next_ = (next_ + 1) % capacity_;
  }
}

std::vector<Transition> ReplayMemory::sample(std::size_t n, std::mt19937_64& rng) const {
  if (buffer_.empty()) throw std::logic_error("replay memory sample: store is empty");
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(buffer_[uniform_below(rng, buffer_.size())]);
  }
  return out;
}

double td_target(const Transition& t, const Mlp& target_net, double gamma,
                 int queue_capacity, MlpWorkspace& ws) {
  const auto x = encode_state(t.next, queue_capacity);
  const auto q = forward_into(target_net, x, ws);
  return t.reward + gamma * *std::max_element(q.begin(), q.end());
}

namespace {

std::vector<int> layer_sizes(const DQNConfig& cfg) {
  return {kStateFeatures, cfg.hidden1, cfg.hidden2, kNumActions};
}

}  // namespace

DQNAgent::DQNAgent(const DQNConfig& cfg, int queue_capacity, std::uint64_t seed)
    : cfg_((cfg.validate(), cfg)),
      queue_capacity_(queue_capacity),
      nets_([&] {
        auto rng = make_rng(seed, RngStream::WeightInit);
        Mlp online = Mlp::glorot_init(layer_sizes(cfg), rng);
        Mlp target = online;
        return OnlineTargetPair{std::move(online), std::move(target)};
      }()),
      replay_(static_cast<std::size_t>(cfg.memory_capacity)),
      explore_rng_(make_rng(seed, RngStream::AgentExplore)),
      sample_rng_(make_rng(seed, RngStream::ReplaySample)),
      grad_(nets_.online.parameter_count(), 0.0) {}

Action DQNAgent::act(const State& s, bool explore) {
  const double eps = explore ? epsilon_at(cfg_.epsilon, episode_) : 0.0;
  if (eps > 0.0 && uniform01(explore_rng_) < eps) {
    return action_from_index(static_cast<int>(uniform_below(explore_rng_, kNumActions)));
  }
  const auto x = encode_state(s, queue_capacity_);
  const auto q = forward_into(nets_.online, x, ws_);
  std::array<double, kNumActions> row{};
  std::copy(q.begin(), q.end(), row.begin());
  return greedy_action(row);
}

void DQNAgent::observe(const Transition& t) {
  replay_.push(t);
  train_step();
}

std::optional<double> DQNAgent::train_step() {
  if (replay_.size() < static_cast<std::size_t>(cfg_.warmup)) return std::nullopt;

  const auto batch = replay_.sample(static_cast<std::size_t>(cfg_.batch_size), sample_rng_);
  std::fill(grad_.begin(), grad_.end(), 0.0);
  double loss_sum = 0.0;
  for (const auto& t : batch) {
    const double y = td_target(t, nets_.target, cfg_.gamma, queue_capacity_, ws_);
    const auto x = encode_state(t.s, queue_capacity_);
    loss_sum += gradient(nets_.online, x, action_index(t.a), y, ws_, grad_, /*accumulate=*/true);
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad_) g *= inv_n;
  sgd_step(nets_.online, grad_, cfg_.alpha);

  ++step_counter_;
  if (step_counter_ % cfg_.target_sync_interval == 0) target_sync(nets_);
  return loss_sum * inv_n;
}

void DQNAgent::end_episode() { ++episode_; }

double DQNAgent::current_epsilon() const { return epsilon_at(cfg_.epsilon, episode_); }

void DQNAgent::save_policy(std::ostream& out) const { nets_.online.save(out); }

void DQNAgent::load_weights(const Mlp& net) {
  if (net.sizes() != layer_sizes(cfg_)) {
    throw std::invalid_argument("dqn load_weights: architecture mismatch");
  }
  nets_.online = net;
  nets_.target = net;
}

}  // namespace drcsim
