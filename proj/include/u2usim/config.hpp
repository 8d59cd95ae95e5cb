#ifndef U2USIM_CONFIG_HPP
#define U2USIM_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "u2usim/channel.hpp"
#include "u2usim/scenario.hpp"
#include "u2usim/video_qoe.hpp"

namespace u2usim {

enum class AgentKind { kGreedy, kTabular, kDqn, kAc };

AgentKind agent_kind_from_string(const std::string& s);
std::string to_string(AgentKind k);

struct AgentConfig {
  AgentKind kind = AgentKind::kDqn;
  double gamma = 0.8;  // discount rate

  // exploration (tabular + DQN)
  double epsilon_initial = 1.0;
  double epsilon_final = 0.1;
  double epsilon_decay_fraction = 0.8;  // of the training TTIs

  // DQN
  std::vector<int> dqn_hidden = {256, 128, 128};
  double adam_lr = 0.01;
  int minibatch = 32;
  int replay_capacity = 10000;
  int target_sync_period = 100;  // learn steps between target copies
  int learn_every = 1;           // env steps per learn call

  // actor-critic
  std::vector<int> actor_hidden = {128, 128};
  std::vector<int> critic_hidden = {128, 128};
  double actor_lr = 0.001;
  double critic_lr = 0.01;
  bool linear_critic = false;  // V = w^T s instead of the MLP critic

  // tabular
  double tabular_alpha = 0.01;

  double grad_clip_norm = 10.0;

  void validate() const;
};

struct RunConfig {
  int episodes = 100;
  int ttis_per_episode = 100;
  int eval_episodes = 20;
  std::uint64_t seed = 1;
  int compare_seeds = 5;
  std::string out_dir = "runs/out";
  std::string format = "csv";  // csv | json

  void validate() const;
};

struct ExperimentConfig {
  GridWorld grid;
  ScenarioParams scenario;
  ChannelParams channel;
  QoeWeights qoe;
  ResolutionLadder ladder = ResolutionLadder::defaults();
  std::vector<double> power_levels_dbm = {23.0, 25.0, 30.0};
  AgentConfig agent;
  RunConfig run;

  void validate() const;

  std::string to_json(int indent = 2) const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  // Canonical serialisation of everything except the agent block, the
  // seed and the output directory; used for the apples-to-apples guard.
  std::string scenario_fingerprint() const;
};

}  // namespace u2usim

#endif  // U2USIM_CONFIG_HPP
