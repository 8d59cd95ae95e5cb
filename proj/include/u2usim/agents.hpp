#ifndef U2USIM_AGENTS_HPP
#define U2USIM_AGENTS_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "u2usim/env.hpp"
#include "u2usim/nn.hpp"

// The four decision policies behind one observe -> act -> learn
// interface. All agents emit fixed-layout sub-action tuples (-1 for
// heads that are inactive in the current TTI).

namespace u2usim {

// One Bellman backup: (1-alpha) q + alpha (reward + gamma max_next).
double q_update(double q, double alpha, double reward, double gamma,
                double max_next);

struct EpsilonSchedule {
  double initial = 1.0;
  double final_value = 0.1;
  double decay_fraction = 0.8;  // of the horizon
  long horizon = 1;             // training env steps

  double at(long step) const;
};

class Agent {
 public:
  virtual ~Agent() = default;

  // Head choices for the current state; explore=false must be
  // deterministic (argmax / best response) and draw no randomness.
  virtual std::vector<int> act(Environment& env, bool explore) = 0;

  // Training-phase transition hand-off. `env` has already advanced to
  // the transition's next state.
  virtual void observe(const Environment& env, const Transition& t) {
    (void)env;
    (void)t;
  }

  // One learning step; called once per training TTI.
  virtual void learn() {}

  virtual void save(const std::string& path) const;
  virtual void load(const std::string& path);
  virtual std::string kind() const = 0;
};

// Coordinate ascent on the immediate reward with fading pinned to 0 dB:
// sub-actions are optimised in enumeration order (BS move, UE moves,
// resolutions, powers), each against the current values of the others;
// ties go to the lowest index. Stateless across TTIs.
class GreedyAgent : public Agent {
 public:
  std::vector<int> act(Environment& env, bool explore) override;
  std::string kind() const override { return "greedy"; }
};

// Tabular Q-learning over the discretized state key. Feasible only for
// toy scenarios (one area, coarse grid); the table grows per visited
// key.
class TabularQAgent : public Agent {
 public:
  TabularQAgent(std::vector<int> head_domains, double alpha, double gamma,
                EpsilonSchedule eps, std::uint64_t run_seed);

  std::vector<int> act(Environment& env, bool explore) override;
  void observe(const Environment& env, const Transition& t) override;
  void learn() override;
  void save(const std::string& path) const override;
  void load(const std::string& path) override;
  std::string kind() const override { return "tabular"; }

  size_t table_size() const { return table_.size(); }

 private:
  using Key = std::vector<int>;
  std::vector<std::vector<double>>& row(const Key& key);

  std::vector<int> head_domains_;
  double alpha_;
  double gamma_;
  EpsilonSchedule eps_;
  RandomStream explore_rng_;
  long train_steps_ = 0;
  std::map<Key, std::vector<std::vector<double>>> table_;

  struct Pending {
    Key key_s;
    Key key_s2;
    std::vector<int> action;
    double reward = 0.0;
  };
  std::optional<Pending> pending_;
  Key last_act_key_;
};

struct DqnOptions {
  std::vector<int> hidden = {256, 128, 128};
  double adam_lr = 0.01;
  double gamma = 0.8;
  int minibatch = 32;
  int replay_capacity = 10000;
  int target_sync_period = 100;  // learn steps
  int learn_every = 1;           // env steps
  double grad_clip_norm = 10.0;
  EpsilonSchedule eps;
};

class DqnAgent : public Agent {
 public:
  DqnAgent(int state_dim, std::vector<int> head_domains, DqnOptions opt,
           std::uint64_t run_seed);

  std::vector<int> act(Environment& env, bool explore) override;
  void observe(const Environment& env, const Transition& t) override;
  void learn() override;
  void save(const std::string& path) const override;
  void load(const std::string& path) override;
  std::string kind() const override { return "dqn"; }

  // Head choices from an arbitrary state/mask pair (toy-problem entry
  // point; `act` wraps it).
  std::vector<int> act_on(const std::vector<double>& state,
                          const std::vector<std::uint8_t>& active,
                          bool explore);
  // One gradient step on a minibatch of transitions; returns the mean
  // squared residual, or nullopt when the buffer is still underfull.
  std::optional<double> learn_minibatch();

  const Mlp& online() const { return online_; }
  const Mlp& target() const { return target_; }
  ReplayBuffer& replay() { return replay_; }
  long learn_steps() const { return learn_steps_; }
  double current_epsilon() const { return opt_.eps.at(train_steps_); }

 private:
  std::vector<int> head_domains_;
  std::vector<int> head_offsets_;
  DqnOptions opt_;
  Mlp online_;
  Mlp target_;
  AdamState adam_;
  ReplayBuffer replay_;
  RandomStream explore_rng_;
  long train_steps_ = 0;
  long learn_steps_ = 0;
};

struct AcOptions {
  std::vector<int> actor_hidden = {128, 128};
  std::vector<int> critic_hidden = {128, 128};
  bool linear_critic = false;
  double actor_lr = 0.001;
  double critic_lr = 0.01;
  double gamma = 0.8;
  double grad_clip_norm = 10.0;
};

// On-policy actor-critic: softmax policy heads, TD-error-scaled plain
// additive updates, exactly one learn per observed transition.
class AcAgent : public Agent {
 public:
  AcAgent(int state_dim, std::vector<int> head_domains, AcOptions opt,
          std::uint64_t run_seed);

  std::vector<int> act(Environment& env, bool explore) override;
  void observe(const Environment& env, const Transition& t) override;
  void learn() override;
  void save(const std::string& path) const override;
  void load(const std::string& path) override;
  std::string kind() const override { return "ac"; }

  std::vector<int> act_on(const std::vector<double>& state,
                          const std::vector<std::uint8_t>& active,
                          bool explore);
  struct LearnResult {
    double td_error = 0.0;
    double actor_objective = 0.0;  // delta * ln pi(a|s)
  };
  LearnResult learn_on(const Transition& t);

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  std::vector<double> head_probabilities(const std::vector<double>& state,
                                         int head) const;

 private:
  std::vector<int> head_domains_;
  std::vector<int> head_offsets_;
  AcOptions opt_;
  Mlp actor_;
  Mlp critic_;
  RandomStream explore_rng_;
  std::optional<Transition> pending_;
};

std::unique_ptr<Agent> make_agent(const ExperimentConfig& cfg,
                                  const Environment& env,
                                  std::uint64_t run_seed);

}  // namespace u2usim

#endif  // U2USIM_AGENTS_HPP
