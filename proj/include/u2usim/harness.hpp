#ifndef U2USIM_HARNESS_HPP
#define U2USIM_HARNESS_HPP

#include <string>
#include <vector>

#include "u2usim/agents.hpp"
#include "u2usim/config.hpp"
#include "u2usim/env.hpp"

// Experiment orchestration: training/eval loops, metric aggregation and
// file export. Every run is a pure function of (config, seed); metrics
// files from identical inputs are byte-identical.

namespace u2usim {

struct MetricsRow {
  int episode = 0;
  int tti = 0;
  double reward = 0.0;
  double qoe = 0.0;
  double delay_s = 0.0;
  double smoothness_penalty = 0.0;
  double mean_power_dbm = 0.0;
  int min_resolution_index = 0;
  double mean_rate_bps = 0.0;
  int active_ues = 0;
};

struct EpisodeRow {
  int episode = 0;
  std::string phase;  // train | eval
  double mean_reward = 0.0;
  double mean_qoe = 0.0;
  double mean_delay_s = 0.0;
  double mean_smoothness_penalty = 0.0;
  double mean_power_dbm = 0.0;
  double mean_min_resolution_index = 0.0;
  double mean_rate_bps = 0.0;
  double mean_active_ues = 0.0;
};

struct RunResult {
  std::vector<MetricsRow> tti_rows;
  std::vector<EpisodeRow> episode_rows;
  std::string tti_metrics_path;
  std::string episode_metrics_path;
  std::string manifest_path;
  std::string checkpoint_path;
  bool diverged = false;
  std::string error;

  // eval-phase means across eval episodes
  double eval_mean_qoe = 0.0;
  double eval_mean_delay_s = 0.0;
  double eval_mean_smoothness = 0.0;
  double eval_mean_resolution = 0.0;
  double eval_mean_power_dbm = 0.0;
  double eval_mean_rate_bps = 0.0;
};

// Trains for run.episodes, then runs run.eval_episodes with exploration
// disabled; writes per-TTI metrics, per-episode metrics and a JSON run
// manifest into run.out_dir. Divergence produces partial outputs plus an
// error manifest instead of an exception.
RunResult run_experiment(const ExperimentConfig& config);

// In-memory variant used by tests: no files are written.
RunResult run_experiment_in_memory(const ExperimentConfig& config,
                                   Agent* preloaded_agent = nullptr);

// Evaluation only, from a checkpoint (learned agents) or fresh (greedy).
RunResult run_eval(const ExperimentConfig& config,
                   const std::string& checkpoint_path);

struct ComparisonRow {
  std::string agent;
  int seeds = 0;
  double mean_qoe = 0.0, sd_qoe = 0.0;
  double mean_delay_s = 0.0, sd_delay_s = 0.0;
  double mean_smoothness = 0.0, sd_smoothness = 0.0;
  double mean_resolution = 0.0, sd_resolution = 0.0;
  double mean_power_dbm = 0.0, sd_power_dbm = 0.0;
};

// Runs each config over run.compare_seeds seeds (run.seed, run.seed+1,
// ...) and aggregates eval-phase means. All configs must be identical
// except for the agent block; anything else is refused with ConfigError.
std::vector<ComparisonRow> compare_agents(
    const std::vector<ExperimentConfig>& configs);

// RFC-4180 CSV with a header row, '.' decimal separator, 9 significant
// digits.
std::string tti_rows_to_csv(const std::vector<MetricsRow>& rows);
std::string episode_rows_to_csv(const std::vector<EpisodeRow>& rows);
std::string comparison_to_csv(const std::vector<ComparisonRow>& rows);
std::string format_sig9(double v);

// git-style content hash (SHA-1 over "blob <len>\0<data>").
std::string git_blob_sha1(const std::string& data);

}  // namespace u2usim

#endif  // U2USIM_HARNESS_HPP
