// drcsim: train, evaluate, and sweep mode-selection agents for the
// radar/communication simulator, emitting reproducible CSVs and SVG plots.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "drcsim/config.hpp"
#include "drcsim/csv.hpp"
#include "drcsim/dqn.hpp"
#include "drcsim/harness.hpp"
#include "drcsim/plot.hpp"
#include "drcsim/selftest.hpp"
#include "drcsim/version.hpp"

namespace fs = std::filesystem;
using namespace drcsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;    // bad flags, bad config, bad values
constexpr int kExitRuntime = 2;  // I/O or execution failure

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string agent;
  std::uint64_t seed = 0;
  const CLI::Option* seed_option = nullptr;
  int threads = 0;

  bool seed_set() const { return seed_option != nullptr && seed_option->count() > 0; }
};

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

FullConfig load_config(const CommonOptions& opts, bool for_sweep) {
  FullConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = parse_config_file(opts.config_path);
  } else {
    validate_config(cfg);  // defaults are expected to be valid; fail loudly if not
  }
  if (opts.seed_set()) cfg.run.seeds = {opts.seed};
  if (!opts.agent.empty()) {
    const AgentKind kind = agent_kind_from_name(opts.agent);
    cfg.run.agent = kind;
    if (for_sweep) cfg.sweep_agents = {kind};
  }
  validate_config(cfg);
  return cfg;
}

fs::path resolve_out_dir(const CommonOptions& opts) {
  std::string dir = opts.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("DRCSIM_OUT"); env && *env) dir = env;
  }
  if (dir.empty()) dir = "out";
  fs::path path{dir};
  fs::create_directories(path);
  return path;
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand,
                    const FullConfig& cfg) {
  std::string text;
  text += "# drcsim ";
  text += kVersion;
  text += "\n# generated ";
  text += timestamp_utc();
  text += "\n# subcommand ";
  text += subcommand;
  text += "\n";
  text += render_config(cfg);
  atomic_write_file(out_dir / "manifest.txt", text);
}

int resolve_threads(const CommonOptions& opts) {
  return opts.threads > 0 ? opts.threads : default_threads();
}

void write_policy_files(const fs::path& out_dir, std::span<const SeedRun> runs) {
  for (const auto& run : runs) {
    std::ostringstream body;
    run.result.agent->save_policy(body);
    atomic_write_file(out_dir / ("policy_seed" + std::to_string(run.seed) + ".txt"), body.str());
  }
}

// Plots never gate a run: on any failure we warn and keep the CSVs.
template <typename Fn>
void best_effort_plot(const fs::path& path, Fn&& make_svg) {
  try {
    atomic_write_file(path, make_svg());
  } catch (const std::exception& e) {
    std::cerr << "warning: skipped plot " << path.string() << ": " << e.what() << "\n";
  }
}

void print_eval_summary(std::ostream& out, std::span<const SeedRun> runs, int window) {
  std::vector<double> rewards, throughputs, misses;
  for (const auto& run : runs) {
    const Metrics m = compute_metrics(run.result.eval, window);
    rewards.push_back(m.average_reward);
    throughputs.push_back(m.throughput);
    if (m.miss_detection_probability) misses.push_back(*m.miss_detection_probability);
  }
  out << "eval over last " << window << " episodes, median of " << runs.size() << " seed(s): "
      << "average_reward=" << aggregate_seeds(rewards).median
      << " throughput=" << aggregate_seeds(throughputs).median;
  if (!misses.empty()) out << " miss_detection=" << aggregate_seeds(misses).median;
  out << "\n";
}

int cmd_train(const CommonOptions& opts) {
  const FullConfig cfg = load_config(opts, /*for_sweep=*/false);
  const fs::path out_dir = resolve_out_dir(opts);
  write_manifest(out_dir, "train", cfg);

  const auto runs = run_seeds(cfg.run, resolve_threads(opts));
  atomic_write_file(out_dir / "episodes.csv", episodes_csv(runs));
  atomic_write_file(out_dir / "summary.csv", summary_csv(runs, cfg.run.metrics_window));
  write_policy_files(out_dir, runs);

  best_effort_plot(out_dir / "reward_curve.svg", [&] {
    std::vector<PlotSeries> series;
    for (const auto& run : runs) {
      PlotSeries s;
      s.label = "seed " + std::to_string(run.seed);
      for (const auto& rec : run.result.train) {
        s.x.push_back(rec.episode);
        s.y.push_back(rec.total_reward);
      }
      series.push_back(std::move(s));
    }
    return line_chart_svg("Training reward, " + agent_kind_name(cfg.run.agent) + " agent",
                          "episode", "total reward", series);
  });

  std::cout << "trained " << agent_kind_name(cfg.run.agent) << " on " << cfg.run.seeds.size()
            << " seed(s), " << cfg.run.episodes << " episodes of " << cfg.run.steps_per_episode
            << " steps\n";
  print_eval_summary(std::cout, runs, cfg.run.metrics_window);
  std::cout << "outputs in " << out_dir.string() << "\n";
  return kExitOk;
}

std::unique_ptr<Agent> load_policy_agent(const ExperimentConfig& cfg, std::uint64_t seed,
                                         const std::string& policy_path) {
  auto agent = make_agent(cfg, seed);
  if (cfg.agent == AgentKind::RoundRobin) return agent;
  if (policy_path.empty()) {
    throw ConfigError("--policy is required when evaluating a " + agent_kind_name(cfg.agent) +
                      " agent");
  }
  std::ifstream in(policy_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open policy file '" + policy_path + "'");
  if (cfg.agent == AgentKind::QLearning) {
    static_cast<QLearningAgent&>(*agent).load_table(QTable::load(in));
  } else {
    static_cast<DQNAgent&>(*agent).load_weights(Mlp::load(in));
  }
  return agent;
}

int cmd_eval(const CommonOptions& opts, const std::string& policy_path) {
  const FullConfig cfg = load_config(opts, /*for_sweep=*/false);
  const fs::path out_dir = resolve_out_dir(opts);
  write_manifest(out_dir, "eval", cfg);

  std::vector<SeedRun> runs(cfg.run.seeds.size());
  for (std::size_t i = 0; i < cfg.run.seeds.size(); ++i) {
    const std::uint64_t seed = cfg.run.seeds[i];
    auto agent = load_policy_agent(cfg.run, seed, policy_path);
    Environment env(cfg.run.env, seed);
    runs[i].seed = seed;
    for (int e = 0; e < cfg.run.eval_episodes; ++e) {
      auto rec = run_episode(env, *agent, cfg.run.steps_per_episode, /*train=*/false);
      rec.episode = e;
      runs[i].result.eval.push_back(rec);
    }
    runs[i].result.agent = std::move(agent);
  }

  atomic_write_file(out_dir / "episodes.csv", episodes_csv(runs));
  atomic_write_file(out_dir / "summary.csv", summary_csv(runs, cfg.run.metrics_window));

  best_effort_plot(out_dir / "eval_reward.svg", [&] {
    std::vector<PlotSeries> series;
    for (const auto& run : runs) {
      PlotSeries s;
      s.label = "seed " + std::to_string(run.seed);
      for (const auto& rec : run.result.eval) {
        s.x.push_back(rec.episode);
        s.y.push_back(rec.total_reward);
      }
      series.push_back(std::move(s));
    }
    return line_chart_svg("Greedy evaluation reward, " + agent_kind_name(cfg.run.agent) +
                              " agent",
                          "episode", "total reward", series);
  });

  std::cout << "evaluated " << agent_kind_name(cfg.run.agent) << " on " << cfg.run.seeds.size()
            << " seed(s)\n";
  print_eval_summary(std::cout, runs, cfg.run.metrics_window);
  std::cout << "outputs in " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const CommonOptions& opts) {
  const FullConfig cfg = load_config(opts, /*for_sweep=*/true);
  const SweepSpec spec = cfg.sweep_spec();  // rejects configs without a sweep section
  const fs::path out_dir = resolve_out_dir(opts);
  write_manifest(out_dir, "sweep", cfg);

  const auto rows = run_sweep(spec, &with_sweep_value, resolve_threads(opts));
  atomic_write_file(out_dir / "sweep.csv", sweep_csv(rows));

  auto plot_metric = [&](const std::string& file, const std::string& title,
                         const std::string& y_label, auto pick) {
    best_effort_plot(out_dir / file, [&] {
      std::vector<PlotSeries> series;
      for (AgentKind agent : spec.agents) {
        PlotSeries s;
        s.label = agent_kind_name(agent);
        for (const auto& row : rows) {
          if (row.agent != agent) continue;
          s.x.push_back(row.value);
          s.y.push_back(pick(row));
        }
        series.push_back(std::move(s));
      }
      return line_chart_svg(title, spec.parameter, y_label, series);
    });
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  plot_metric("sweep_reward.svg", "Average reward vs " + spec.parameter, "average reward",
              [](const SweepRow& r) { return r.average_reward.median; });
  plot_metric("sweep_throughput.svg", "Throughput vs " + spec.parameter, "packets per step",
              [](const SweepRow& r) { return r.throughput.median; });
  plot_metric("sweep_miss.svg", "Miss-detection vs " + spec.parameter,
              "miss-detection probability", [nan](const SweepRow& r) {
                return r.miss_detection ? r.miss_detection->median : nan;
              });

  std::cout << "swept " << spec.parameter << " over " << spec.values.size() << " value(s), "
            << spec.agents.size() << " agent(s), " << spec.base.seeds.size() << " seed(s): "
            << rows.size() << " rows\n";
  std::cout << "outputs in " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_selftest(const std::string& inject_fault) {
  bool inject_gradient = false;
  if (!inject_fault.empty()) {
    if (inject_fault == "gradient-sign") {
      inject_gradient = true;
    } else {
      std::cerr << "error: unknown fault '" << inject_fault << "' (known: gradient-sign)\n";
      return kExitUsage;
    }
  }
  const auto results = run_selftests(inject_gradient);
  bool all_passed = true;
  for (const auto& res : results) {
    std::cout << (res.passed ? "PASS" : "FAIL") << " " << res.name << ": " << res.detail << "\n";
    all_passed = all_passed && res.passed;
  }
  std::cout << (all_passed ? "selftest OK\n" : "selftest FAILED\n");
  return all_passed ? kExitOk : kExitRuntime;
}

void add_common_options(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("--config", opts.config_path, "Experiment config file (defaults when omitted)");
  opts.seed_option =
      sub->add_option("--seed", opts.seed, "Replace the seed list with a single seed");
  sub->add_option("--out", opts.out_dir,
                  "Output directory (fallback: DRCSIM_OUT env var, then ./out)");
  sub->add_option("--agent", opts.agent, "Agent override: roundrobin, qlearning, or dqn");
  sub->add_option("--threads", opts.threads, "Worker threads (default: hardware concurrency)")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radar/communication mode-selection simulator and training harness"};
  app.require_subcommand(1);

  CommonOptions train_opts, eval_opts, sweep_opts;
  std::string policy_path, inject_fault;

  auto* train = app.add_subcommand("train", "Train an agent and log per-episode results");
  add_common_options(train, train_opts);

  auto* eval = app.add_subcommand("eval", "Evaluate a saved policy greedily");
  add_common_options(eval, eval_opts);
  eval->add_option("--policy", policy_path,
                   "Policy file from a train run (required for learning agents)");

  auto* sweep = app.add_subcommand("sweep", "Train across a parameter sweep and aggregate");
  add_common_options(sweep, sweep_opts);

  auto* selftest = app.add_subcommand("selftest", "Run the fast invariant suite");
  selftest->add_option("--inject-fault", inject_fault,
                       "Deliberately break a check to prove it can fail (gradient-sign)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_opts);
    if (*eval) return cmd_eval(eval_opts, policy_path);
    if (*sweep) return cmd_sweep(sweep_opts);
    return cmd_selftest(inject_fault);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
