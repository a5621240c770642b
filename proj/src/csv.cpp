#include "drcsim/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace drcsim {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    std::filesystem::remove(tmp, ignore);
    throw std::runtime_error("failed renaming '" + tmp.string() + "' to '" + path.string() +
                             "': " + ec.message());
  }
}

namespace {

void append_phase(std::string& out, std::uint64_t seed, Phase phase,
                  std::span<const EpisodeRecord> records) {
  const std::string phase_label = phase_name(phase);
  for (const auto& rec : records) {
    out += std::to_string(seed);
    out += ',';
    out += phase_label;
    out += ',';
    out += std::to_string(rec.episode);
    out += ',';
    out += format_double(rec.total_reward);
    out += ',';
    out += std::to_string(rec.packets_sent);
    out += ',';
    out += std::to_string(rec.events_total);
    out += ',';
    out += std::to_string(rec.events_missed);
    out += '\n';
  }
}

std::string miss_text(const std::optional<double>& miss) {
  return miss ? format_double(*miss) : "nan";
}

}  // namespace

std::string episodes_csv(std::span<const SeedRun> runs) {
  std::string out = "seed,phase,episode,total_reward,packets_sent,events_total,events_missed\n";
  for (const auto& run : runs) {
    append_phase(out, run.seed, Phase::Train, run.result.train);
    append_phase(out, run.seed, Phase::Eval, run.result.eval);
  }
  return out;
}

std::string summary_csv(std::span<const SeedRun> runs, int metrics_window) {
  std::string out = "seed,average_reward,throughput,miss_detection_probability\n";
  std::vector<double> rewards, throughputs, misses;
  for (const auto& run : runs) {
    const Metrics m = compute_metrics(run.result.eval, metrics_window);
    out += std::to_string(run.seed);
    out += ',';
    out += format_double(m.average_reward);
    out += ',';
    out += format_double(m.throughput);
    out += ',';
    out += miss_text(m.miss_detection_probability);
    out += '\n';
    rewards.push_back(m.average_reward);
    throughputs.push_back(m.throughput);
    if (m.miss_detection_probability) misses.push_back(*m.miss_detection_probability);
  }
  const Aggregate reward_agg = aggregate_seeds(rewards);
  const Aggregate tp_agg = aggregate_seeds(throughputs);
  const bool has_miss = !misses.empty();
  const Aggregate miss_agg = has_miss ? aggregate_seeds(misses) : Aggregate{};
  auto stat_row = [&](const char* label, double r, double t, double miss) {
    out += label;
    out += ',';
    out += format_double(r);
    out += ',';
    out += format_double(t);
    out += ',';
    out += has_miss ? format_double(miss) : "nan";
    out += '\n';
  };
  stat_row("median", reward_agg.median, tp_agg.median, miss_agg.median);
  stat_row("min", reward_agg.min, tp_agg.min, miss_agg.min);
  stat_row("max", reward_agg.max, tp_agg.max, miss_agg.max);
  return out;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out =
      "value,agent,average_reward_median,average_reward_min,average_reward_max,"
      "throughput_median,throughput_min,throughput_max,"
      "miss_detection_median,miss_detection_min,miss_detection_max\n";
  for (const auto& row : rows) {
    out += format_double(row.value);
    out += ',';
    out += agent_kind_name(row.agent);
    out += ',';
    out += format_double(row.average_reward.median);
    out += ',';
    out += format_double(row.average_reward.min);
    out += ',';
    out += format_double(row.average_reward.max);
    out += ',';
    out += format_double(row.throughput.median);
    out += ',';
    out += format_double(row.throughput.min);
    out += ',';
    out += format_double(row.throughput.max);
    out += ',';
    if (row.miss_detection) {
      out += format_double(row.miss_detection->median);
      out += ',';
      out += format_double(row.miss_detection->min);
      out += ',';
      out += format_double(row.miss_detection->max);
    } else {
      out += "nan,nan,nan";
    }
    out += '\n';
  }
  return out;
}

}  // namespace drcsim
