#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>
#include <sstream>
#include <vector>

#include "drcsim/agents.hpp"
#include "drcsim/rng.hpp"

using namespace drcsim;

namespace {

State toy_state(int d) { return State{d, 0, 0, 0, 0, 0}; }

}  // namespace

TEST_CASE("round-robin alternates starting with communication") {
  RoundRobinAgent agent;
  const State s;
  CHECK(agent.act(s, true) == Action::Communicate);
  CHECK(agent.act(s, true) == Action::Radar);
  CHECK(agent.act(s, false) == Action::Communicate);
  CHECK(agent.act(s, true) == Action::Radar);
  CHECK(agent.act(s, true) == Action::Communicate);
  CHECK(agent.act(s, true) == Action::Radar);
  CHECK(agent.kind() == "roundrobin");
}

TEST_CASE("round-robin splits a T-step episode ceil/floor and resets per episode") {
  RoundRobinAgent agent;
  const State s;
  for (int T : {1, 2, 7, 200}) {
    int comm = 0, radar = 0;
    for (int t = 0; t < T; ++t) {
      (agent.act(s, true) == Action::Communicate ? comm : radar)++;
    }
    CHECK(comm == (T + 1) / 2);
    CHECK(radar == T / 2);
    agent.end_episode();
  }
  // After a reset the phase starts over.
  CHECK(agent.act(s, true) == Action::Communicate);
}

TEST_CASE("greedy selection and tie-breaking") {
  CHECK(greedy_action({3.0, 1.0}) == Action::Communicate);
  CHECK(greedy_action({1.0, 3.0}) == Action::Radar);
  CHECK(greedy_action({2.0, 2.0}) == Action::Communicate);  // ties to mode 0

  auto rng = make_rng(1, RngStream::AgentExplore);
  CHECK(epsilon_greedy({3.0, 1.0}, 0.0, rng) == Action::Communicate);
  CHECK(epsilon_greedy({1.0, 3.0}, 0.0, rng) == Action::Radar);
}

TEST_CASE("greedy action is invariant under positive affine rescaling") {
  auto rng = make_rng(2, RngStream::AgentExplore);
  for (int i = 0; i < 1000; ++i) {
    const std::array<double, kNumActions> q{uniform01(rng) * 10 - 5, uniform01(rng) * 10 - 5};
    const double k = uniform01(rng) * 5 + 0.01;  // strictly positive scale
    const double c = uniform01(rng) * 20 - 10;
    const std::array<double, kNumActions> scaled{k * q[0] + c, k * q[1] + c};
    CHECK(greedy_action(q) == greedy_action(scaled));
  }
}

TEST_CASE("epsilon_greedy with eps=0 consumes no randomness") {
  auto rng = make_rng(3, RngStream::AgentExplore);
  auto clone = rng;
  for (int i = 0; i < 100; ++i) epsilon_greedy({1.0, 2.0}, 0.0, rng);
  CHECK(rng() == clone());
}

TEST_CASE("epsilon_greedy at eps=1 is uniform over both actions") {
  auto rng = make_rng(4, RngStream::AgentExplore);
  const int n = 100000;
  int radar = 0;
  for (int i = 0; i < n; ++i) {
    radar += epsilon_greedy({5.0, -5.0}, 1.0, rng) == Action::Radar ? 1 : 0;
  }
  const double freq = static_cast<double>(radar) / n;
  const double se = std::sqrt(0.25 / n);
  CHECK(std::abs(freq - 0.5) < 3.0 * se);
}

TEST_CASE("epsilon_at follows the decaying schedule with a floor") {
  EpsilonSchedule sched;  // 1.0, 0.99, 0.01
  CHECK(epsilon_at(sched, 0) == 1.0);
  CHECK(epsilon_at(sched, 1) == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(epsilon_at(sched, 500) == 0.01);  // 0.99^500 ~ 0.0066 < floor

  EpsilonSchedule flat{0.3, 1.0, 0.0};
  CHECK(epsilon_at(flat, 0) == 0.3);
  CHECK(epsilon_at(flat, 1000) == 0.3);
}

TEST_CASE("schedule and config validation") {
  EpsilonSchedule bad{0.5, 0.99, 0.8};  // floor above start
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  EpsilonSchedule bad2{1.5, 0.99, 0.0};
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
  EpsilonSchedule bad3{1.0, 0.0, 0.0};  // decay must be positive
  CHECK_THROWS_AS(bad3.validate(), std::invalid_argument);
  CHECK_NOTHROW(EpsilonSchedule{}.validate());

  QLearningConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = QLearningConfig{};
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("q_update worked examples") {
  QTable table(10);
  Transition t;
  t.s = toy_state(3);
  t.a = Action::Communicate;
  t.reward = 2.0;
  t.next = toy_state(4);

  q_update(table, t, 0.1, 0.99);
  CHECK(table.get(t.s, t.a) == doctest::Approx(0.2).epsilon(1e-12));

  // alpha=1, gamma=0 overwrites with the immediate reward.
  QTable t2(10, 5.0);
  q_update(t2, t, 1.0, 0.0);
  CHECK(t2.get(t.s, t.a) == 2.0);
}

TEST_CASE("q_update touches exactly one cell") {
  QTable table(10);
  auto rng = make_rng(5, RngStream::AgentExplore);
  // Seed the table with noise.
  for (std::size_t i = 0; i < table.size() / kNumActions; ++i) {
    for (int a = 0; a < kNumActions; ++a) table.at(i, a) = uniform01(rng) * 10 - 5;
  }
  const QTable before = table;

  Transition t;
  t.s = State{7, 1, 0, 1, 0, 1};
  t.a = Action::Radar;
  t.reward = 25.0;
  t.next = State{7, 0, 0, 0, 0, 0};
  q_update(table, t, 0.1, 0.99);

  const int changed_state = state_index(t.s, 10);
  int diffs = 0;
  for (std::size_t i = 0; i < table.size() / kNumActions; ++i) {
    for (int a = 0; a < kNumActions; ++a) {
      if (table.at(i, a) != before.at(i, a)) {
        ++diffs;
        CHECK(static_cast<int>(i) == changed_state);
        CHECK(a == action_index(t.a));
      }
    }
  }
  CHECK(diffs == 1);

  // And the changed value matches the backup formula.
  const double target = t.reward + 0.99 * std::max(before.get(t.next, Action::Communicate),
                                                   before.get(t.next, Action::Radar));
  const double want = before.get(t.s, t.a) + 0.1 * (target - before.get(t.s, t.a));
  CHECK(table.get(t.s, t.a) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("q-learning matches value iteration on a deterministic toy problem") {
  // Two states (queue occupancy 0/1), two actions, next state = action taken,
  // rewards r[s][a] = {{1,0},{2,3}}, gamma = 0.9. Value iteration gives
  // Q* = {{25.3, 27.0}, {26.3, 30.0}}.
  const double gamma = 0.9;
  const double r[2][2] = {{1.0, 0.0}, {2.0, 3.0}};

  double qstar[2][2] = {};
  for (int iter = 0; iter < 1000; ++iter) {
    double next[2][2];
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        next[s][a] = r[s][a] + gamma * std::max(qstar[a][0], qstar[a][1]);
      }
    }
    std::copy(&next[0][0], &next[0][0] + 4, &qstar[0][0]);
  }
  CHECK(qstar[0][0] == doctest::Approx(25.3).epsilon(1e-9));
  CHECK(qstar[0][1] == doctest::Approx(27.0).epsilon(1e-9));
  CHECK(qstar[1][0] == doctest::Approx(26.3).epsilon(1e-9));
  CHECK(qstar[1][1] == doctest::Approx(30.0).epsilon(1e-9));

  QTable table(1);
  auto rng = make_rng(6, RngStream::AgentExplore);
  long visits[2][2] = {};
  int s = 0;
  for (long step = 0; step < 100000; ++step) {
    const int a = static_cast<int>(uniform_below(rng, 2));
    const double alpha = std::max(0.05, 1.0 / static_cast<double>(++visits[s][a]));
    Transition t;
    t.s = toy_state(s);
    t.a = action_from_index(a);
    t.reward = r[s][a];
    t.next = toy_state(a);
    q_update(table, t, alpha, gamma);
    s = a;
  }
  double max_err = 0.0;
  for (int st = 0; st < 2; ++st) {
    for (int a = 0; a < 2; ++a) {
      max_err = std::max(max_err,
                         std::abs(table.get(toy_state(st), action_from_index(a)) - qstar[st][a]));
    }
  }
  CHECK(max_err < 1e-3);
}

TEST_CASE("q-table save/load round-trip") {
  QTable table(3);
  auto rng = make_rng(7, RngStream::AgentExplore);
  for (std::size_t i = 0; i < table.size() / kNumActions; ++i) {
    for (int a = 0; a < kNumActions; ++a) table.at(i, a) = uniform01(rng) * 100 - 50;
  }
  std::stringstream ss;
  table.save(ss);
  const QTable back = QTable::load(ss);
  CHECK(back == table);

  std::stringstream bad("bogus");
  CHECK_THROWS(QTable::load(bad));
}

TEST_CASE("q-learning agent learns online and tracks its schedule") {
  QLearningConfig cfg;
  QLearningAgent agent(cfg, 10, 42);
  CHECK(agent.kind() == "qlearning");
  CHECK(agent.current_epsilon() == epsilon_at(cfg.epsilon, 0));

  // observe() applies exactly the tabular backup.
  Transition t;
  t.s = toy_state(2);
  t.a = Action::Communicate;
  t.reward = 2.0;
  t.next = toy_state(0);
  QTable expect = agent.table();
  q_update(expect, t, cfg.alpha, cfg.gamma);
  agent.observe(t);
  CHECK(agent.table() == expect);

  agent.end_episode();
  CHECK(agent.current_epsilon() == epsilon_at(cfg.epsilon, 1));

  // Greedy action with explore=false follows the table.
  QTable biased(10);
  biased.set(toy_state(0), Action::Radar, 1.0);
  agent.load_table(biased);
  CHECK(agent.act(toy_state(0), false) == Action::Radar);
  CHECK(agent.act(toy_state(1), false) == Action::Communicate);

  // Capacity mismatch is rejected.
  CHECK_THROWS_AS(agent.load_table(QTable(5)), std::invalid_argument);
}

TEST_CASE("q-learning agent exploration is reproducible per seed") {
  QLearningConfig cfg;
  QLearningAgent a(cfg, 10, 9), b(cfg, 10, 9);
  const State s = toy_state(0);
  for (int i = 0; i < 200; ++i) CHECK(a.act(s, true) == b.act(s, true));
}
