#include "u2usim/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "u2usim/log.hpp"

namespace u2usim {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_sig9(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double sum = 0.0;
  for (double x : v) sum += (x - m) * (x - m);
  return std::sqrt(sum / (v.size() - 1));
}

}  // namespace

// ---------------------------------------------------------------------------
// SHA-1 (for the git-style content hash in run manifests)
// ---------------------------------------------------------------------------

namespace {

struct Sha1 {
  std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u,
                        0xC3D2E1F0u};
  std::uint64_t total = 0;
  std::array<std::uint8_t, 64> block{};
  size_t fill = 0;

  static std::uint32_t rol(std::uint32_t v, int s) {
    return (v << s) | (v >> (32 - s));
  }

  void process(const std::uint8_t* p) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    }
    for (int i = 16; i < 80; ++i) {
      w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = tmp;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }

  void update(const void* data, size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    total += len;
    while (len > 0) {
      const size_t take = std::min(len, block.size() - fill);
      std::memcpy(block.data() + fill, p, take);
      fill += take;
      p += take;
      len -= take;
      if (fill == block.size()) {
        process(block.data());
        fill = 0;
      }
    }
  }

  std::string hex_digest() {
    const std::uint64_t bits = total * 8;
    const std::uint8_t one = 0x80;
    update(&one, 1);
    const std::uint8_t zero = 0x00;
    while (fill != 56) update(&zero, 1);
    std::uint8_t len_be[8];
    for (int i = 0; i < 8; ++i) {
      len_be[i] = static_cast<std::uint8_t>(bits >> (56 - 8 * i));
    }
    update(len_be, 8);
    char out[41];
    for (int i = 0; i < 5; ++i) {
      std::snprintf(out + 8 * i, 9, "%08x", h[i]);
    }
    return std::string(out, 40);
  }
};

}  // namespace

std::string git_blob_sha1(const std::string& data) {
  Sha1 sha;
  const std::string header = "blob " + std::to_string(data.size());
  sha.update(header.data(), header.size() + 1);  // includes the NUL
  sha.update(data.data(), data.size());
  return sha.hex_digest();
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

std::string tti_rows_to_csv(const std::vector<MetricsRow>& rows) {
  std::string out =
      "episode,tti,reward,qoe,delay_s,smoothness_penalty,mean_power_dbm,"
      "min_resolution_index,mean_rate_bps,active_ues\n";
  for (const auto& r : rows) {
    out += std::to_string(r.episode);
    out += ',';
    out += std::to_string(r.tti);
    out += ',';
    out += format_sig9(r.reward);
    out += ',';
    out += format_sig9(r.qoe);
    out += ',';
    out += format_sig9(r.delay_s);
    out += ',';
    out += format_sig9(r.smoothness_penalty);
    out += ',';
    out += format_sig9(r.mean_power_dbm);
    out += ',';
    out += std::to_string(r.min_resolution_index);
    out += ',';
    out += format_sig9(r.mean_rate_bps);
    out += ',';
    out += std::to_string(r.active_ues);
    out += '\n';
  }
  return out;
}

std::string episode_rows_to_csv(const std::vector<EpisodeRow>& rows) {
  std::string out =
      "episode,phase,mean_reward,mean_qoe,mean_delay_s,"
      "mean_smoothness_penalty,mean_power_dbm,mean_min_resolution_index,"
      "mean_rate_bps,mean_active_ues\n";
  for (const auto& r : rows) {
    out += std::to_string(r.episode);
    out += ',';
    out += csv_field(r.phase);
    out += ',';
    out += format_sig9(r.mean_reward);
    out += ',';
    out += format_sig9(r.mean_qoe);
    out += ',';
    out += format_sig9(r.mean_delay_s);
    out += ',';
    out += format_sig9(r.mean_smoothness_penalty);
    out += ',';
    out += format_sig9(r.mean_power_dbm);
    out += ',';
    out += format_sig9(r.mean_min_resolution_index);
    out += ',';
    out += format_sig9(r.mean_rate_bps);
    out += ',';
    out += format_sig9(r.mean_active_ues);
    out += '\n';
  }
  return out;
}

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows) {
  std::string out =
      "agent,seeds,mean_qoe,sd_qoe,mean_delay_s,sd_delay_s,mean_smoothness,"
      "sd_smoothness,mean_resolution,sd_resolution,mean_power_dbm,"
      "sd_power_dbm\n";
  for (const auto& r : rows) {
    out += csv_field(r.agent);
    out += ',';
    out += std::to_string(r.seeds);
    out += ',';
    out += format_sig9(r.mean_qoe);
    out += ',';
    out += format_sig9(r.sd_qoe);
    out += ',';
    out += format_sig9(r.mean_delay_s);
    out += ',';
    out += format_sig9(r.sd_delay_s);
    out += ',';
    out += format_sig9(r.mean_smoothness);
    out += ',';
    out += format_sig9(r.sd_smoothness);
    out += ',';
    out += format_sig9(r.mean_resolution);
    out += ',';
    out += format_sig9(r.sd_resolution);
    out += ',';
    out += format_sig9(r.mean_power_dbm);
    out += ',';
    out += format_sig9(r.sd_power_dbm);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run loop
// ---------------------------------------------------------------------------

namespace {

MetricsRow row_from_step(int episode, int tti, const StepOutcome& out) {
  MetricsRow row;
  row.episode = episode;
  row.tti = tti;
  row.reward = out.reward;
  row.qoe = out.metrics.qoe;
  row.delay_s = out.metrics.delay_s;
  row.smoothness_penalty = out.metrics.smoothness_penalty;
  row.mean_power_dbm = mean_of(out.metrics.ue_power_dbm);
  row.min_resolution_index =
      out.metrics.area_resolution.empty()
          ? 0
          : *std::min_element(out.metrics.area_resolution.begin(),
                              out.metrics.area_resolution.end());
  row.mean_rate_bps = mean_of(out.metrics.ue_rate_bps);
  row.active_ues = out.metrics.active_ue_count;
  return row;
}

EpisodeRow summarize(int episode, const std::string& phase,
                     const std::vector<MetricsRow>& rows, size_t begin) {
  EpisodeRow e;
  e.episode = episode;
  e.phase = phase;
  const size_t n = rows.size() - begin;
  if (n == 0) return e;
  for (size_t i = begin; i < rows.size(); ++i) {
    e.mean_reward += rows[i].reward;
    e.mean_qoe += rows[i].qoe;
    e.mean_delay_s += rows[i].delay_s;
    e.mean_smoothness_penalty += rows[i].smoothness_penalty;
    e.mean_power_dbm += rows[i].mean_power_dbm;
    e.mean_min_resolution_index += rows[i].min_resolution_index;
    e.mean_rate_bps += rows[i].mean_rate_bps;
    e.mean_active_ues += rows[i].active_ues;
  }
  const double inv = 1.0 / static_cast<double>(n);
  e.mean_reward *= inv;
  e.mean_qoe *= inv;
  e.mean_delay_s *= inv;
  e.mean_smoothness_penalty *= inv;
  e.mean_power_dbm *= inv;
  e.mean_min_resolution_index *= inv;
  e.mean_rate_bps *= inv;
  e.mean_active_ues *= inv;
  return e;
}

void run_episode(Environment& env, Agent& agent, int episode,
                 std::uint64_t ep_seed, bool training, RunResult& result) {
  env.reset(ep_seed);
  const size_t begin = result.tti_rows.size();
  for (int t = 0; t < env.episode_length(); ++t) {
    const std::vector<double> s = env.state();
    const std::vector<int> heads = agent.act(env, training);
    const JointAction action = env.action_from_heads(heads);
    const StepOutcome out = env.step(action);
    if (training) {
      agent.observe(env, Transition{s, heads, out.reward, out.next_state});
      agent.learn();
    }
    result.tti_rows.push_back(row_from_step(episode, t, out));
  }
  result.episode_rows.push_back(summarize(
      episode, training ? "train" : "eval", result.tti_rows, begin));
}

void finish_eval_summary(const ExperimentConfig& cfg, RunResult& result) {
  std::vector<double> qoe, delay, smooth, reso, power, rate;
  for (const auto& e : result.episode_rows) {
    if (e.phase != "eval") continue;
    qoe.push_back(e.mean_qoe);
    delay.push_back(e.mean_delay_s);
    smooth.push_back(e.mean_smoothness_penalty);
    reso.push_back(e.mean_min_resolution_index);
    power.push_back(e.mean_power_dbm);
    rate.push_back(e.mean_rate_bps);
  }
  (void)cfg;
  result.eval_mean_qoe = mean_of(qoe);
  result.eval_mean_delay_s = mean_of(delay);
  result.eval_mean_smoothness = mean_of(smooth);
  result.eval_mean_resolution = mean_of(reso);
  result.eval_mean_power_dbm = mean_of(power);
  result.eval_mean_rate_bps = mean_of(rate);
}

void export_run(const ExperimentConfig& cfg, Agent* agent, RunResult& result,
                double wall_time_s) {
  const fs::path dir(cfg.run.out_dir);
  fs::create_directories(dir);

  const bool as_json = cfg.run.format == "json";
  const std::string tti_name = as_json ? "metrics_tti.json" : "metrics_tti.csv";
  const std::string ep_name =
      as_json ? "metrics_episode.json" : "metrics_episode.csv";
  result.tti_metrics_path = (dir / tti_name).string();
  result.episode_metrics_path = (dir / ep_name).string();
  result.manifest_path = (dir / "manifest.json").string();

  if (as_json) {
    json tti = json::array();
    for (const auto& r : result.tti_rows) {
      tti.push_back(json{{"episode", r.episode},
                         {"tti", r.tti},
                         {"reward", r.reward},
                         {"qoe", r.qoe},
                         {"delay_s", r.delay_s},
                         {"smoothness_penalty", r.smoothness_penalty},
                         {"mean_power_dbm", r.mean_power_dbm},
                         {"min_resolution_index", r.min_resolution_index},
                         {"mean_rate_bps", r.mean_rate_bps},
                         {"active_ues", r.active_ues}});
    }
    write_text(result.tti_metrics_path, tti.dump(1));
    json ep = json::array();
    for (const auto& r : result.episode_rows) {
      ep.push_back(json{{"episode", r.episode},
                        {"phase", r.phase},
                        {"mean_reward", r.mean_reward},
                        {"mean_qoe", r.mean_qoe},
                        {"mean_delay_s", r.mean_delay_s},
                        {"mean_smoothness_penalty", r.mean_smoothness_penalty},
                        {"mean_power_dbm", r.mean_power_dbm},
                        {"mean_min_resolution_index",
                         r.mean_min_resolution_index},
                        {"mean_rate_bps", r.mean_rate_bps},
                        {"mean_active_ues", r.mean_active_ues}});
    }
    write_text(result.episode_metrics_path, ep.dump(1));
  } else {
    write_text(result.tti_metrics_path, tti_rows_to_csv(result.tti_rows));
    write_text(result.episode_metrics_path,
               episode_rows_to_csv(result.episode_rows));
  }

  if (agent != nullptr) {
    result.checkpoint_path = (dir / "checkpoint.json").string();
    agent->save(result.checkpoint_path);
  }

  const std::string config_echo = cfg.to_json(2);
  json manifest{
      {"config", json::parse(config_echo)},
      {"config_hash", git_blob_sha1(config_echo)},
      {"seed", cfg.run.seed},
      {"rng", "mt19937_64 + splitmix64 stream split "
              "(fires/fading/exploration/init), hand-rolled transforms"},
      {"wall_time_s", wall_time_s},
      {"outputs",
       {{"tti_metrics", result.tti_metrics_path},
        {"episode_metrics", result.episode_metrics_path},
        {"checkpoint", result.checkpoint_path}}},
  };
  if (result.diverged) {
    manifest["error"] = result.error;
    manifest["status"] = "diverged";
  } else {
    manifest["status"] = "ok";
  }
  write_text(result.manifest_path, manifest.dump(2));
}

RunResult run_loop(const ExperimentConfig& cfg, Agent& agent,
                   bool training_phase) {
  RunResult result;
  Environment env(cfg);
  int episode = 0;
  try {
    if (training_phase) {
      for (int e = 0; e < cfg.run.episodes; ++e, ++episode) {
        run_episode(env, agent, episode, episode_seed(cfg.run.seed, episode),
                    true, result);
      }
    }
    for (int e = 0; e < cfg.run.eval_episodes; ++e, ++episode) {
      const int eval_index = training_phase ? episode : cfg.run.episodes + e;
      run_episode(env, agent, eval_index,
                  episode_seed(cfg.run.seed, eval_index), false, result);
    }
  } catch (const TrainingDivergence& e) {
    result.diverged = true;
    result.error = e.what();
    U2USIM_LOG_ERROR("run aborted: %s", e.what());
  }
  finish_eval_summary(cfg, result);
  return result;
}

}  // namespace

RunResult run_experiment_in_memory(const ExperimentConfig& config,
                                   Agent* preloaded_agent) {
  ExperimentConfig cfg = config;
  cfg.validate();
  Environment env(cfg);
  std::unique_ptr<Agent> own;
  Agent* agent = preloaded_agent;
  if (agent == nullptr) {
    own = make_agent(cfg, env, cfg.run.seed);
    agent = own.get();
  }
  return run_loop(cfg, *agent, true);
}

RunResult run_experiment(const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Environment env(cfg);
  auto agent = make_agent(cfg, env, cfg.run.seed);
  RunResult result = run_loop(cfg, *agent, true);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  export_run(cfg, agent.get(), result, wall);
  return result;
}

RunResult run_eval(const ExperimentConfig& config,
                   const std::string& checkpoint_path) {
  ExperimentConfig cfg = config;
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Environment env(cfg);
  auto agent = make_agent(cfg, env, cfg.run.seed);
  if (!checkpoint_path.empty()) agent->load(checkpoint_path);
  RunResult result = run_loop(cfg, *agent, false);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  export_run(cfg, agent.get(), result, wall);
  return result;
}

std::vector<ComparisonRow> compare_agents(
    const std::vector<ExperimentConfig>& configs) {
  if (configs.empty()) return {};
  const std::string fingerprint = configs.front().scenario_fingerprint();
  for (const auto& cfg : configs) {
    if (cfg.scenario_fingerprint() != fingerprint) {
      throw ConfigError(
          "compare_agents: configs differ outside the agent block "
          "(apples-to-apples guard)");
    }
  }
  std::vector<ComparisonRow> rows;
  for (const auto& base : configs) {
    std::vector<double> qoe, delay, smooth, reso, power;
    for (int i = 0; i < base.run.compare_seeds; ++i) {
      ExperimentConfig cfg = base;
      cfg.run.seed = base.run.seed + static_cast<std::uint64_t>(i);
      if (!cfg.run.out_dir.empty()) {
        cfg.run.out_dir += "/" + to_string(cfg.agent.kind) + "_seed" +
                           std::to_string(cfg.run.seed);
      }
      RunResult r = cfg.run.out_dir.empty() ? run_experiment_in_memory(cfg)
                                            : run_experiment(cfg);
      if (r.diverged) {
        throw std::runtime_error("compare_agents: run diverged: " + r.error);
      }
      qoe.push_back(r.eval_mean_qoe);
      delay.push_back(r.eval_mean_delay_s);
      smooth.push_back(r.eval_mean_smoothness);
      reso.push_back(r.eval_mean_resolution);
      power.push_back(r.eval_mean_power_dbm);
    }
    ComparisonRow row;
    row.agent = to_string(base.agent.kind);
    row.seeds = base.run.compare_seeds;
    row.mean_qoe = mean_of(qoe);
    row.sd_qoe = sd_of(qoe);
    row.mean_delay_s = mean_of(delay);
    row.sd_delay_s = sd_of(delay);
    row.mean_smoothness = mean_of(smooth);
    row.sd_smoothness = sd_of(smooth);
    row.mean_resolution = mean_of(reso);
    row.sd_resolution = sd_of(reso);
    row.mean_power_dbm = mean_of(power);
    row.sd_power_dbm = sd_of(power);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace u2usim
