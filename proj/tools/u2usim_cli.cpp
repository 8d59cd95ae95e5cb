// u2usim command-line front end: train / eval / compare subcommands
// around the experiment harness.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "u2usim/harness.hpp"
#include "u2usim/log.hpp"

namespace {

using namespace u2usim;

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return ExperimentConfig{};
  return ExperimentConfig::from_file(path);
}

void apply_overrides(ExperimentConfig& cfg, const std::string& agent,
                     std::uint64_t seed, bool seed_set, int episodes,
                     const std::string& out, const std::string& format) {
  if (!agent.empty()) cfg.agent.kind = agent_kind_from_string(agent);
  if (seed_set) cfg.run.seed = seed;
  if (episodes > 0) cfg.run.episodes = episodes;
  if (!out.empty()) cfg.run.out_dir = out;
  if (!format.empty()) cfg.run.format = format;
}

void print_eval_summary(const RunResult& r) {
  std::printf("eval mean qoe        %s\n", format_sig9(r.eval_mean_qoe).c_str());
  std::printf("eval mean delay [s]  %s\n",
              format_sig9(r.eval_mean_delay_s).c_str());
  std::printf("eval mean smoothness %s\n",
              format_sig9(r.eval_mean_smoothness).c_str());
  std::printf("eval mean power [dBm] %s\n",
              format_sig9(r.eval_mean_power_dbm).c_str());
  std::printf("metrics: %s\n", r.tti_metrics_path.c_str());
  std::printf("manifest: %s\n", r.manifest_path.c_str());
  if (!r.checkpoint_path.empty()) {
    std::printf("checkpoint: %s\n", r.checkpoint_path.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV-to-UAV live-video streaming simulator"};
  app.require_subcommand(1);

  std::string config_path, agent, out_dir, format, checkpoint;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int episodes = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--agent", agent, "greedy | tabular | dqn | ac");
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&](std::uint64_t s) {
          seed = s;
          seed_set = true;
        },
        "run seed (u64)");
    cmd->add_option("--episodes", episodes, "training episodes");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--format", format, "csv | json metrics format")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* train = app.add_subcommand("train", "train an agent, then evaluate");
  add_common(train);

  auto* eval = app.add_subcommand("eval", "evaluate a (checkpointed) agent");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint,
                   "checkpoint written by a previous train run");

  auto* compare = app.add_subcommand(
      "compare", "train several agents on one scenario and compare");
  add_common(compare);
  std::vector<std::string> agents = {"greedy", "dqn", "ac"};
  compare->add_option("--agents", agents, "agents to compare")->delimiter(',');
  int seeds = 0;
  compare->add_option("--seeds", seeds, "seeds per agent (>= 1)");

  auto* print_config =
      app.add_subcommand("print-config", "dump the effective config JSON");
  add_common(print_config);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = load_config(config_path);
    apply_overrides(cfg, agent, seed, seed_set, episodes, out_dir, format);

    if (print_config->parsed()) {
      cfg.validate();
      std::cout << cfg.to_json(2) << "\n";
      return 0;
    }
    if (train->parsed()) {
      const RunResult r = run_experiment(cfg);
      if (r.diverged) {
        std::fprintf(stderr, "training diverged: %s\n", r.error.c_str());
        print_eval_summary(r);
        return 2;
      }
      print_eval_summary(r);
      return 0;
    }
    if (eval->parsed()) {
      const RunResult r = run_eval(cfg, checkpoint);
      print_eval_summary(r);
      return r.diverged ? 2 : 0;
    }
    if (compare->parsed()) {
      if (seeds > 0) cfg.run.compare_seeds = seeds;
      std::vector<ExperimentConfig> configs;
      for (const auto& name : agents) {
        ExperimentConfig c = cfg;
        c.agent.kind = agent_kind_from_string(name);
        configs.push_back(c);
      }
      const auto rows = compare_agents(configs);
      const std::string csv = comparison_to_csv(rows);
      std::cout << csv;
      if (!cfg.run.out_dir.empty()) {
        std::filesystem::create_directories(cfg.run.out_dir);
        const std::string path = cfg.run.out_dir + "/comparison.csv";
        std::ofstream f(path, std::ios::binary);
        f << csv;
        std::printf("comparison: %s\n", path.c_str());
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
