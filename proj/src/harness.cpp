#include "drcsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace drcsim {

std::string agent_kind_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::RoundRobin: return "roundrobin";
    case AgentKind::QLearning: return "qlearning";
    case AgentKind::Dqn: return "dqn";
  }
  throw std::logic_error("unreachable agent kind");
}

AgentKind agent_kind_from_name(const std::string& name) {
  for (AgentKind k : kAllAgentKinds) {
    if (agent_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown agent '" + name +
                              "' (expected roundrobin, qlearning, or dqn)");
}

void ExperimentConfig::validate() const {
  env.validate();
  ql.validate();
  dqn.validate();
  epsilon.validate();
  auto require = [](bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
  };
  require(episodes >= 1, "run.episodes must be >= 1");
  require(steps_per_episode >= 1, "run.steps_per_episode must be >= 1");
  require(eval_episodes >= 1, "run.eval_episodes must be >= 1");
  require(!seeds.empty(), "run.seeds must list at least one seed");
  require(metrics_window >= 1, "run.metrics_window must be >= 1");
  require(metrics_window <= eval_episodes,
          "run.metrics_window must not exceed run.eval_episodes");
  require(convergence_window >= 1, "run.convergence_window must be >= 1");
  require(convergence_tol > 0.0, "run.convergence_tol must be > 0");
}

std::unique_ptr<Agent> make_agent(AgentKind kind, const ExperimentConfig& cfg,
                                  std::uint64_t seed) {
  switch (kind) {
    case AgentKind::RoundRobin:
      return std::make_unique<RoundRobinAgent>();
    case AgentKind::QLearning: {
      QLearningConfig ql = cfg.ql;
      ql.epsilon = cfg.epsilon;
      return std::make_unique<QLearningAgent>(ql, cfg.env.queue_capacity, seed);
    }
    case AgentKind::Dqn: {
      DQNConfig dqn = cfg.dqn;
      dqn.epsilon = cfg.epsilon;
      return std::make_unique<DQNAgent>(dqn, cfg.env.queue_capacity, seed);
    }
  }
  throw std::logic_error("unreachable agent kind");
}

std::unique_ptr<Agent> make_agent(const ExperimentConfig& cfg, std::uint64_t seed) {
  return make_agent(cfg.agent, cfg, seed);
}

std::string phase_name(Phase p) { return p == Phase::Train ? "train" : "eval"; }

EpisodeRecord run_episode(Environment& env, Agent& agent, int steps, bool train) {
  if (steps < 1) throw std::invalid_argument("run_episode: steps must be >= 1");
  EpisodeRecord rec;
  rec.steps = steps;
  State s = env.reset();
  for (int t = 0; t < steps; ++t) {
    const Action a = agent.act(s, train);
    const StepOutcome out = env.step(a);
    rec.total_reward += out.reward;
    rec.packets_sent += out.packets_sent;
    if (out.event_occurred) {
      ++rec.events_total;
      if (!out.event_detected) ++rec.events_missed;
    }
    if (train) agent.observe(Transition{s, a, out.reward, out.next_state});
    s = out.next_state;
  }
  agent.end_episode();
  return rec;
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double scale = 1.0;
  for (double r : rewards) {
    total += scale * r;
    scale *= gamma;
  }
  return total;
}

Metrics compute_metrics(std::span<const EpisodeRecord> records, int window) {
  if (window < 1) throw std::invalid_argument("compute_metrics: window must be >= 1");
  if (static_cast<std::size_t>(window) > records.size()) {
    throw std::invalid_argument("compute_metrics: window exceeds record count");
  }
  const auto tail = records.subspan(records.size() - static_cast<std::size_t>(window));
  long packets = 0, steps = 0, events = 0, missed = 0;
  double reward_sum = 0.0;
  for (const auto& rec : tail) {
    packets += rec.packets_sent;
    steps += rec.steps;
    events += rec.events_total;
    missed += rec.events_missed;
    reward_sum += rec.total_reward;
  }
  Metrics m;
  m.throughput = static_cast<double>(packets) / static_cast<double>(steps);
  if (events > 0) {
    m.miss_detection_probability = static_cast<double>(missed) / static_cast<double>(events);
  }
  m.average_reward = reward_sum / window;
  return m;
}

TrainResult train_agent(AgentKind kind, const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainResult result;
  result.agent = make_agent(kind, cfg, seed);
  Environment env(cfg.env, seed);
  result.train.reserve(static_cast<std::size_t>(std::max(cfg.episodes, 0)));
  result.eval.reserve(static_cast<std::size_t>(std::max(cfg.eval_episodes, 0)));
  for (int e = 0; e < cfg.episodes; ++e) {
    auto rec = run_episode(env, *result.agent, cfg.steps_per_episode, /*train=*/true);
    rec.episode = e;
    result.train.push_back(rec);
  }
  for (int e = 0; e < cfg.eval_episodes; ++e) {
    auto rec = run_episode(env, *result.agent, cfg.steps_per_episode, /*train=*/false);
    rec.episode = e;
    result.eval.push_back(rec);
  }
  return result;
}

TrainResult train_agent(const ExperimentConfig& cfg, std::uint64_t seed) {
  return train_agent(cfg.agent, cfg, seed);
}

int convergence_episode(std::span<const double> rewards, int window, double tolerance) {
  const int n = static_cast<int>(rewards.size());
  if (window < 1) throw std::invalid_argument("convergence_episode: window must be >= 1");
  if (n < 2 * window) {
    throw std::invalid_argument("convergence_episode: need at least 2*window records");
  }
  // Moving window means; means[e] covers rewards[e .. e+window-1].
  const int last_start = n - window;
  std::vector<double> means(static_cast<std::size_t>(last_start) + 1);
  double sum = 0.0;
  for (int i = 0; i < window; ++i) sum += rewards[static_cast<std::size_t>(i)];
  means[0] = sum / window;
  for (int e = 1; e <= last_start; ++e) {
    sum += rewards[static_cast<std::size_t>(e + window - 1)] -
           rewards[static_cast<std::size_t>(e - 1)];
    means[static_cast<std::size_t>(e)] = sum / window;
  }
  const double plateau = means.back();
  const double band = tolerance * std::abs(plateau);
  // Scan backwards for the last out-of-band window; convergence starts after it.
  int first_in_band = 0;
  for (int e = last_start; e >= 0; --e) {
    if (std::abs(means[static_cast<std::size_t>(e)] - plateau) > band) {
      first_in_band = e + 1;
      break;
    }
  }
  return first_in_band <= n - 2 * window ? first_in_band : kNotConverged;
}

std::vector<double> episode_rewards(std::span<const EpisodeRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& rec : records) out.push_back(rec.total_reward);
  return out;
}

namespace {

// Runs fn(0..n-1) across up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<SeedRun> run_seeds(const ExperimentConfig& cfg, int threads) {
  std::vector<SeedRun> runs(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), threads, [&](std::size_t i) {
    runs[i].seed = cfg.seeds[i];
    runs[i].result = train_agent(cfg, cfg.seeds[i]);
  });
  return runs;
}

Aggregate aggregate_seeds(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate_seeds: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Aggregate agg;
  agg.min = sorted.front();
  agg.max = sorted.back();
  const std::size_t n = sorted.size();
  agg.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return agg;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, ApplySweepValue apply, int threads) {
  if (spec.values.empty()) throw std::invalid_argument("sweep needs at least one value");
  if (spec.agents.empty()) throw std::invalid_argument("sweep needs at least one agent");
  spec.base.validate();

  struct Task {
    std::size_t row;
    std::uint64_t seed;
  };
  const std::size_t n_rows = spec.values.size() * spec.agents.size();
  const std::size_t n_seeds = spec.base.seeds.size();

  // Resolve every config up front so a bad sweep value fails before any run.
  std::vector<ExperimentConfig> row_cfg;
  std::vector<SweepRow> rows(n_rows);
  row_cfg.reserve(n_rows);
  std::vector<Task> tasks;
  tasks.reserve(n_rows * n_seeds);
  std::size_t row = 0;
  for (double value : spec.values) {
    ExperimentConfig cfg = apply(spec.base, spec.parameter, value);
    cfg.validate();
    for (AgentKind agent : spec.agents) {
      cfg.agent = agent;
      row_cfg.push_back(cfg);
      rows[row].value = value;
      rows[row].agent = agent;
      for (std::uint64_t seed : spec.base.seeds) tasks.push_back({row, seed});
      ++row;
    }
  }

  std::vector<Metrics> cell(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const auto& task = tasks[i];
    const auto result = train_agent(row_cfg[task.row], task.seed);
    cell[i] = compute_metrics(result.eval, row_cfg[task.row].metrics_window);
  });

  for (std::size_t r = 0; r < n_rows; ++r) {
    std::vector<double> reward, throughput, miss;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].row != r) continue;
      reward.push_back(cell[i].average_reward);
      throughput.push_back(cell[i].throughput);
      if (cell[i].miss_detection_probability) {
        miss.push_back(*cell[i].miss_detection_probability);
      }
    }
    rows[r].average_reward = aggregate_seeds(reward);
    rows[r].throughput = aggregate_seeds(throughput);
    if (!miss.empty()) rows[r].miss_detection = aggregate_seeds(miss);
  }
  return rows;
}

}  // namespace drcsim
