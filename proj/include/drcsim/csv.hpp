#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "drcsim/harness.hpp"

namespace drcsim {

// Full-precision decimal (%.17g): distinct doubles render distinctly, so
// equal files mean equal numbers.
std::string format_double(double v);

// Writes to a sibling temp file, then renames over the target, so readers
// never observe a partially written file. Throws std::runtime_error on
// failure and removes the temp file.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

// Per-episode log across all seeds: train rows then eval rows per seed.
// Header: seed,phase,episode,total_reward,packets_sent,events_total,events_missed
std::string episodes_csv(std::span<const SeedRun> runs);

// Eval-window metrics per seed plus aggregate rows labelled median/min/max.
// Header: seed,average_reward,throughput,miss_detection_probability
// An undefined miss-detection probability (no events) renders as "nan".
std::string summary_csv(std::span<const SeedRun> runs, int metrics_window);

// One row per (sweep value, agent) with seed-aggregated metrics.
// Header: value,agent,average_reward_median,average_reward_min,average_reward_max,
//         throughput_median,throughput_min,throughput_max,
//         miss_detection_median,miss_detection_min,miss_detection_max
std::string sweep_csv(std::span<const SweepRow> rows);

}  // namespace drcsim
