#include "u2usim/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace u2usim {

using nlohmann::json;

AgentKind agent_kind_from_string(const std::string& s) {
  if (s == "greedy") return AgentKind::kGreedy;
  if (s == "tabular") return AgentKind::kTabular;
  if (s == "dqn") return AgentKind::kDqn;
  if (s == "ac") return AgentKind::kAc;
  throw ConfigError("agent.kind: unknown agent '" + s + "'");
}

std::string to_string(AgentKind k) {
  switch (k) {
    case AgentKind::kGreedy: return "greedy";
    case AgentKind::kTabular: return "tabular";
    case AgentKind::kDqn: return "dqn";
    case AgentKind::kAc: return "ac";
  }
  return "?";
}

void AgentConfig::validate() const {
  if (gamma < 0.0 || gamma >= 1.0) {
    throw ConfigError("agent.gamma: must be in [0, 1)");
  }
  if (epsilon_initial < 0.0 || epsilon_initial > 1.0 || epsilon_final < 0.0 ||
      epsilon_final > epsilon_initial) {
    throw ConfigError("agent.epsilon: need 0 <= final <= initial <= 1");
  }
  if (epsilon_decay_fraction < 0.0 || epsilon_decay_fraction > 1.0) {
    throw ConfigError("agent.epsilon_decay_fraction: must be in [0, 1]");
  }
  if (adam_lr <= 0.0) throw ConfigError("agent.adam_lr: must be > 0");
  if (minibatch < 1) throw ConfigError("agent.minibatch: must be >= 1");
  if (replay_capacity < 1) {
    throw ConfigError("agent.replay_capacity: must be >= 1");
  }
  if (target_sync_period < 1) {
    throw ConfigError("agent.target_sync_period: must be >= 1");
  }
  if (learn_every < 1) throw ConfigError("agent.learn_every: must be >= 1");
  if (actor_lr <= 0.0) throw ConfigError("agent.actor_lr: must be > 0");
  if (critic_lr <= 0.0) throw ConfigError("agent.critic_lr: must be > 0");
  if (tabular_alpha <= 0.0 || tabular_alpha > 1.0) {
    throw ConfigError("agent.tabular_alpha: must be in (0, 1]");
  }
  if (grad_clip_norm <= 0.0) {
    throw ConfigError("agent.grad_clip_norm: must be > 0");
  }
  for (int h : dqn_hidden) {
    if (h < 1) throw ConfigError("agent.dqn_hidden: sizes must be >= 1");
  }
  for (int h : actor_hidden) {
    if (h < 1) throw ConfigError("agent.actor_hidden: sizes must be >= 1");
  }
  for (int h : critic_hidden) {
    if (h < 1) throw ConfigError("agent.critic_hidden: sizes must be >= 1");
  }
}

void RunConfig::validate() const {
  if (episodes < 1) throw ConfigError("run.episodes: must be >= 1");
  if (ttis_per_episode < 1) {
    throw ConfigError("run.ttis_per_episode: must be >= 1");
  }
  if (eval_episodes < 0) throw ConfigError("run.eval_episodes: must be >= 0");
  if (compare_seeds < 1) throw ConfigError("run.compare_seeds: must be >= 1");
  if (format != "csv" && format != "json") {
    throw ConfigError("run.format: must be csv or json");
  }
}

void ExperimentConfig::validate() const {
  grid.validate();
  scenario.validate(grid);
  channel.validate();
  qoe.validate();
  ladder.validate();
  if (power_levels_dbm.empty()) {
    throw ConfigError("power_levels_dbm: must not be empty");
  }
  for (size_t i = 1; i < power_levels_dbm.size(); ++i) {
    if (power_levels_dbm[i] <= power_levels_dbm[i - 1]) {
      throw ConfigError("power_levels_dbm: must be strictly increasing");
    }
  }
  agent.validate();
  run.validate();
}

namespace {

// Missing keys keep their defaults; unknown keys are rejected so typos
// do not silently vanish.
void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) ok = true;
    }
    if (!ok) {
      throw ConfigError(section + "." + key + ": unknown config field");
    }
  }
}

template <typename T>
void get_to(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

json grid_to_json(const GridWorld& g) {
  return json{{"extent_x", g.extent_x}, {"extent_y", g.extent_y},
              {"extent_z", g.extent_z}, {"step_x", g.step_x},
              {"step_y", g.step_y},     {"step_z", g.step_z}};
}

void grid_from_json(const json& j, GridWorld& g) {
  check_keys(j, "grid",
             {"extent_x", "extent_y", "extent_z", "step_x", "step_y", "step_z"});
  get_to(j, "extent_x", g.extent_x);
  get_to(j, "extent_y", g.extent_y);
  get_to(j, "extent_z", g.extent_z);
  get_to(j, "step_x", g.step_x);
  get_to(j, "step_y", g.step_y);
  get_to(j, "step_z", g.step_z);
}

json scenario_to_json(const ScenarioParams& s) {
  return json{{"lambda_a", s.lambda_a},
              {"max_areas", s.max_areas},
              {"ues_per_area", s.ues_per_area},
              {"fire_radius", s.fire_radius},
              {"safety_radius", s.safety_radius},
              {"region_length", s.region_length},
              {"h_max", s.h_max},
              {"fire_height_mu", s.fire_height_mu},
              {"fire_height_sigma", s.fire_height_sigma},
              {"initial_fires", s.initial_fires},
              {"same_altitude", s.same_altitude},
              {"bs_start_x", s.bs_start_x},
              {"bs_start_y", s.bs_start_y}};
}

void scenario_from_json(const json& j, ScenarioParams& s) {
  check_keys(j, "scenario",
             {"lambda_a", "max_areas", "ues_per_area", "fire_radius",
              "safety_radius", "region_length", "h_max", "fire_height_mu",
              "fire_height_sigma", "initial_fires", "same_altitude",
              "bs_start_x", "bs_start_y"});
  get_to(j, "lambda_a", s.lambda_a);
  get_to(j, "max_areas", s.max_areas);
  get_to(j, "ues_per_area", s.ues_per_area);
  get_to(j, "fire_radius", s.fire_radius);
  get_to(j, "safety_radius", s.safety_radius);
  get_to(j, "region_length", s.region_length);
  get_to(j, "h_max", s.h_max);
  get_to(j, "fire_height_mu", s.fire_height_mu);
  get_to(j, "fire_height_sigma", s.fire_height_sigma);
  get_to(j, "initial_fires", s.initial_fires);
  get_to(j, "same_altitude", s.same_altitude);
  get_to(j, "bs_start_x", s.bs_start_x);
  get_to(j, "bs_start_y", s.bs_start_y);
}

json channel_to_json(const ChannelParams& c) {
  return json{{"carrier_hz", c.carrier_hz},   {"eta_los_db", c.eta_los_db},
              {"alpha", c.alpha},             {"gain_db", c.gain_db},
              {"bandwidth_hz", c.bandwidth_hz}, {"noise_dbm", c.noise_dbm},
              {"rice_kappa", c.rice_kappa},   {"rho_comp", c.rho_comp},
              {"min_link_distance", c.min_link_distance}};
}

void channel_from_json(const json& j, ChannelParams& c) {
  check_keys(j, "channel",
             {"carrier_hz", "eta_los_db", "alpha", "gain_db", "bandwidth_hz",
              "noise_dbm", "rice_kappa", "rho_comp", "min_link_distance"});
  get_to(j, "carrier_hz", c.carrier_hz);
  get_to(j, "eta_los_db", c.eta_los_db);
  get_to(j, "alpha", c.alpha);
  get_to(j, "gain_db", c.gain_db);
  get_to(j, "bandwidth_hz", c.bandwidth_hz);
  get_to(j, "noise_dbm", c.noise_dbm);
  get_to(j, "rice_kappa", c.rice_kappa);
  get_to(j, "rho_comp", c.rho_comp);
  get_to(j, "min_link_distance", c.min_link_distance);
}

json qoe_to_json(const QoeWeights& q, const ResolutionLadder& ladder) {
  json entries = json::array();
  for (const auto& e : ladder.entries) {
    entries.push_back(json{{"label", e.label},
                           {"pixels_x", e.pixels_x},
                           {"pixels_y", e.pixels_y},
                           {"min_rate_bps", e.min_rate_bps}});
  }
  return json{{"kappa", q.kappa},
              {"omega", q.omega},
              {"frame_deadline_s", q.frame_deadline_s},
              {"bits_per_pixel", q.bits_per_pixel},
              {"ladder", entries}};
}

void qoe_from_json(const json& j, QoeWeights& q, ResolutionLadder& ladder) {
  check_keys(j, "qoe",
             {"kappa", "omega", "frame_deadline_s", "bits_per_pixel", "ladder"});
  get_to(j, "kappa", q.kappa);
  get_to(j, "omega", q.omega);
  get_to(j, "frame_deadline_s", q.frame_deadline_s);
  get_to(j, "bits_per_pixel", q.bits_per_pixel);
  if (j.contains("ladder")) {
    ladder.entries.clear();
    for (const auto& e : j.at("ladder")) {
      check_keys(e, "qoe.ladder[]",
                 {"label", "pixels_x", "pixels_y", "min_rate_bps"});
      LadderEntry entry;
      get_to(e, "label", entry.label);
      get_to(e, "pixels_x", entry.pixels_x);
      get_to(e, "pixels_y", entry.pixels_y);
      get_to(e, "min_rate_bps", entry.min_rate_bps);
      ladder.entries.push_back(entry);
    }
  }
}

json agent_to_json(const AgentConfig& a) {
  return json{{"kind", to_string(a.kind)},
              {"gamma", a.gamma},
              {"epsilon_initial", a.epsilon_initial},
              {"epsilon_final", a.epsilon_final},
              {"epsilon_decay_fraction", a.epsilon_decay_fraction},
              {"dqn_hidden", a.dqn_hidden},
              {"adam_lr", a.adam_lr},
              {"minibatch", a.minibatch},
              {"replay_capacity", a.replay_capacity},
              {"target_sync_period", a.target_sync_period},
              {"learn_every", a.learn_every},
              {"actor_hidden", a.actor_hidden},
              {"critic_hidden", a.critic_hidden},
              {"actor_lr", a.actor_lr},
              {"critic_lr", a.critic_lr},
              {"linear_critic", a.linear_critic},
              {"tabular_alpha", a.tabular_alpha},
              {"grad_clip_norm", a.grad_clip_norm}};
}

void agent_from_json(const json& j, AgentConfig& a) {
  check_keys(j, "agent",
             {"kind", "gamma", "epsilon_initial", "epsilon_final",
              "epsilon_decay_fraction", "dqn_hidden", "adam_lr", "minibatch",
              "replay_capacity", "target_sync_period", "learn_every",
              "actor_hidden", "critic_hidden", "actor_lr", "critic_lr",
              "linear_critic", "tabular_alpha", "grad_clip_norm"});
  if (j.contains("kind")) {
    a.kind = agent_kind_from_string(j.at("kind").get<std::string>());
  }
  get_to(j, "gamma", a.gamma);
  get_to(j, "epsilon_initial", a.epsilon_initial);
  get_to(j, "epsilon_final", a.epsilon_final);
  get_to(j, "epsilon_decay_fraction", a.epsilon_decay_fraction);
  get_to(j, "dqn_hidden", a.dqn_hidden);
  get_to(j, "adam_lr", a.adam_lr);
  get_to(j, "minibatch", a.minibatch);
  get_to(j, "replay_capacity", a.replay_capacity);
  get_to(j, "target_sync_period", a.target_sync_period);
  get_to(j, "learn_every", a.learn_every);
  get_to(j, "actor_hidden", a.actor_hidden);
  get_to(j, "critic_hidden", a.critic_hidden);
  get_to(j, "actor_lr", a.actor_lr);
  get_to(j, "critic_lr", a.critic_lr);
  get_to(j, "linear_critic", a.linear_critic);
  get_to(j, "tabular_alpha", a.tabular_alpha);
  get_to(j, "grad_clip_norm", a.grad_clip_norm);
}

json run_to_json(const RunConfig& r) {
  return json{{"episodes", r.episodes},
              {"ttis_per_episode", r.ttis_per_episode},
              {"eval_episodes", r.eval_episodes},
              {"seed", r.seed},
              {"compare_seeds", r.compare_seeds},
              {"out_dir", r.out_dir},
              {"format", r.format}};
}

void run_from_json(const json& j, RunConfig& r) {
  check_keys(j, "run",
             {"episodes", "ttis_per_episode", "eval_episodes", "seed",
              "compare_seeds", "out_dir", "format"});
  get_to(j, "episodes", r.episodes);
  get_to(j, "ttis_per_episode", r.ttis_per_episode);
  get_to(j, "eval_episodes", r.eval_episodes);
  get_to(j, "seed", r.seed);
  get_to(j, "compare_seeds", r.compare_seeds);
  get_to(j, "out_dir", r.out_dir);
  get_to(j, "format", r.format);
}

json config_to_json_obj(const ExperimentConfig& c) {
  return json{{"grid", grid_to_json(c.grid)},
              {"scenario", scenario_to_json(c.scenario)},
              {"channel", channel_to_json(c.channel)},
              {"qoe", qoe_to_json(c.qoe, c.ladder)},
              {"power_levels_dbm", c.power_levels_dbm},
              {"agent", agent_to_json(c.agent)},
              {"run", run_to_json(c.run)}};
}

}  // namespace

std::string ExperimentConfig::to_json(int indent) const {
  return config_to_json_obj(*this).dump(indent);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"grid", "scenario", "channel", "qoe", "power_levels_dbm",
              "agent", "run"});
  ExperimentConfig c;
  if (j.contains("grid")) grid_from_json(j.at("grid"), c.grid);
  if (j.contains("scenario")) scenario_from_json(j.at("scenario"), c.scenario);
  if (j.contains("channel")) channel_from_json(j.at("channel"), c.channel);
  if (j.contains("qoe")) qoe_from_json(j.at("qoe"), c.qoe, c.ladder);
  get_to(j, "power_levels_dbm", c.power_levels_dbm);
  if (j.contains("agent")) agent_from_json(j.at("agent"), c.agent);
  if (j.contains("run")) run_from_json(j.at("run"), c.run);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ExperimentConfig::scenario_fingerprint() const {
  json j = config_to_json_obj(*this);
  j.erase("agent");
  j["run"].erase("seed");
  j["run"].erase("out_dir");
  return j.dump();
}

}  // namespace u2usim
