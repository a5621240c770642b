#include "drcsim/selftest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "drcsim/agents.hpp"
#include "drcsim/env.hpp"
#include "drcsim/mlp.hpp"
#include "drcsim/rng.hpp"

namespace drcsim {

namespace {

constexpr std::uint64_t kSelftestSeed = 20240917;

SelftestResult check_reward_table() {
  SelftestResult res{"reward-table", true, ""};
  const RewardParams params;  // (2, 1, 50, 5)
  int checked = 0;
  for (int ai = 0; ai < kNumActions && res.passed; ++ai) {
    for (int c = 0; c <= 1 && res.passed; ++c) {
      for (int event = 0; event <= 1 && res.passed; ++event) {
        for (int b = 0; b <= kNumFactors && res.passed; ++b) {
          const Action a = action_from_index(ai);
          double expected = 0.0;
          if (a == Action::Communicate) {
            expected = event ? -50.0 : (c == 0 ? 2.0 : 1.0);
          } else {
            expected = event ? 5.0 * (b + 1) : 0.0;
          }
          const double got = immediate_reward(params, a, c, event != 0, b);
          ++checked;
          if (got != expected) {
            std::ostringstream msg;
            msg << "a=" << ai << " c=" << c << " event=" << event << " b=" << b << ": got "
                << got << ", expected " << expected;
            res.passed = false;
            res.detail = msg.str();
          }
        }
      }
    }
  }
  if (res.passed) res.detail = std::to_string(checked) + " (a,c,event,b) cells match";
  return res;
}

SelftestResult check_gradient(bool inject_fault) {
  SelftestResult res{"gradient-check", true, ""};
  auto rng = make_rng(kSelftestSeed, RngStream::WeightInit);
  Mlp net = Mlp::glorot_init({kStateFeatures, 8, 8, kNumActions}, rng);
  MlpWorkspace ws;
  std::vector<double> grad(net.parameter_count());
  const double h = 1e-5;
  double worst = 0.0;
  int probes = 0;
  while (probes < 100) {
    std::array<double, kStateFeatures> x{};
    for (auto& xi : x) xi = uniform01(rng);
    const int a = static_cast<int>(uniform_below(rng, kNumActions));
    const double y = 2.0 * uniform01(rng) - 1.0;
    gradient(net, x, a, y, ws, grad);
    // One random parameter with a meaningful gradient per input probe.
    const std::size_t pi = uniform_below(rng, grad.size());
    if (std::abs(grad[pi]) < 1e-6) continue;
    ++probes;
    const double g = inject_fault ? -grad[pi] : grad[pi];
    auto loss_at = [&](double delta) {
      Mlp probe_net = net;
      probe_net.parameters()[pi] += delta;
      const auto q = probe_net.forward(x);
      const double r = q[static_cast<std::size_t>(a)] - y;
      return 0.5 * r * r;
    };
    const double fd = (loss_at(h) - loss_at(-h)) / (2.0 * h);
    const double rel = std::abs(fd - g) / std::max(std::abs(fd), std::abs(g));
    worst = std::max(worst, rel);
  }
  res.passed = worst < 1e-4;
  std::ostringstream msg;
  msg << "max relative error " << worst << " over 100 probes (limit 1e-4)";
  res.detail = msg.str();
  return res;
}

SelftestResult check_queue_conservation() {
  SelftestResult res{"queue-conservation", true, ""};
  auto rng = make_rng(kSelftestSeed, RngStream::EnvExogenous);
  long checked = 0;
  for (long i = 0; i < 1000000 && res.passed; ++i) {
    EnvConfig cfg;
    cfg.queue_capacity = 1 + static_cast<int>(uniform_below(rng, 12));
    cfg.tx_bad = static_cast<int>(uniform_below(rng, 6));
    cfg.tx_good = cfg.tx_bad + static_cast<int>(uniform_below(rng, 5));
    const int d = static_cast<int>(uniform_below(rng, cfg.queue_capacity + 1));
    const Action a = action_from_index(static_cast<int>(uniform_below(rng, kNumActions)));
    const int c = static_cast<int>(uniform_below(rng, 2));
    const int arrivals = static_cast<int>(uniform_below(rng, 13));
    const QueueResult q = queue_step(d, a, c, arrivals, cfg);
    const int service = a == Action::Communicate ? std::min(d, c == 0 ? cfg.tx_good : cfg.tx_bad) : 0;
    const bool ok = q.new_d == d - q.packets_sent + arrivals - q.packets_dropped &&
                    q.new_d >= 0 && q.new_d <= cfg.queue_capacity &&
                    q.packets_sent == service && q.packets_dropped >= 0;
    ++checked;
    if (!ok) {
      std::ostringstream msg;
      msg << "violated at d=" << d << " a=" << action_index(a) << " c=" << c
          << " arrivals=" << arrivals << " D=" << cfg.queue_capacity;
      res.passed = false;
      res.detail = msg.str();
    }
  }
  if (res.passed) res.detail = std::to_string(checked) + " randomized steps conserve packets";
  return res;
}

SelftestResult check_state_index_roundtrip() {
  SelftestResult res{"state-index-roundtrip", true, ""};
  for (int capacity : {1, 3, 10}) {
    const int n = state_count(capacity);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int idx = 0; idx < n; ++idx) {
      const State s = state_from_index(idx, capacity);
      const int back = state_index(s, capacity);
      const bool valid = s.d >= 0 && s.d <= capacity && s.c >= 0 && s.c <= 1 &&
                         s.unfavorable_count() >= 0 && s.unfavorable_count() <= kNumFactors;
      if (back != idx || !valid || seen[static_cast<std::size_t>(idx)]) {
        std::ostringstream msg;
        msg << "index " << idx << " at capacity " << capacity << " does not round-trip";
        res.passed = false;
        res.detail = msg.str();
        return res;
      }
      seen[static_cast<std::size_t>(idx)] = 1;
    }
  }
  res.detail = "bijective over capacities {1, 3, 10}";
  return res;
}

// Two states, two actions, deterministic: next state = action,
// rewards r(s,a) = {{1, 0}, {2, 3}}, gamma = 0.9.
SelftestResult check_toy_mdp_oracle() {
  SelftestResult res{"toy-mdp-q-learning", true, ""};
  const double gamma = 0.9;
  const double reward[2][2] = {{1.0, 0.0}, {2.0, 3.0}};

  // Value iteration to fixed point.
  double q_star[2][2] = {};
  for (int iter = 0; iter < 1000; ++iter) {
    double next[2][2];
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        next[s][a] = reward[s][a] + gamma * std::max(q_star[a][0], q_star[a][1]);
      }
    }
    std::copy(&next[0][0], &next[0][0] + 4, &q_star[0][0]);
  }

  // Tabular Q-learning with the toy states embedded at queue occupancies
  // {0, 1}; exploration is uniform random, alpha decays per-cell.
  QTable table(/*queue_capacity=*/1);
  auto rng = make_rng(kSelftestSeed, RngStream::AgentExplore);
  long visits[2][2] = {};
  State s;  // starts at toy state 0
  for (long step = 0; step < 100000; ++step) {
    const int a = static_cast<int>(uniform_below(rng, kNumActions));
    const double alpha = std::max(0.05, 1.0 / static_cast<double>(++visits[s.d][a]));
    State next;
    next.d = a;
    q_update(table, Transition{s, action_from_index(a), reward[s.d][a], next}, alpha, gamma);
    s = next;
  }

  double worst = 0.0;
  for (int sd = 0; sd < 2; ++sd) {
    for (int a = 0; a < 2; ++a) {
      State state;
      state.d = sd;
      worst = std::max(worst,
                       std::abs(table.get(state, action_from_index(a)) - q_star[sd][a]));
    }
  }
  res.passed = worst < 1e-3;
  std::ostringstream msg;
  msg << "max |Q - Q*| = " << worst << " (limit 1e-3)";
  res.detail = msg.str();
  return res;
}

}  // namespace

std::vector<SelftestResult> run_selftests(bool inject_gradient_fault) {
  std::vector<SelftestResult> results;
  results.push_back(check_reward_table());
  results.push_back(check_gradient(inject_gradient_fault));
  results.push_back(check_queue_conservation());
  results.push_back(check_state_index_roundtrip());
  results.push_back(check_toy_mdp_oracle());
  return results;
}

}  // namespace drcsim
