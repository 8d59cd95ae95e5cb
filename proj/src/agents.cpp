#include "u2usim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "u2usim/log.hpp"

namespace u2usim {

using nlohmann::json;

double q_update(double q, double alpha, double reward, double gamma,
                double max_next) {
  return (1.0 - alpha) * q + alpha * (reward + gamma * max_next);
}

double EpsilonSchedule::at(long step) const {
  const double decay_steps = decay_fraction * static_cast<double>(horizon);
  if (decay_steps <= 0.0 || step >= decay_steps) return final_value;
  const double frac = static_cast<double>(step) / decay_steps;
  return initial + frac * (final_value - initial);
}

void Agent::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("agent save: cannot open " + path);
  out << json{{"kind", kind()}}.dump();
}

void Agent::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("agent load: cannot open " + path);
}

namespace {

int argmax_range(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;  // ties keep the lowest index
  }
  return best;
}

int sample_categorical(std::span<const double> probs, RandomStream& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return static_cast<int>(probs.size()) - 1;
}

std::vector<int> offsets_of(const std::vector<int>& domains) {
  std::vector<int> off(domains.size() + 1, 0);
  for (size_t i = 0; i < domains.size(); ++i) off[i + 1] = off[i] + domains[i];
  return off;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

}  // namespace

// ---------------------------------------------------------------------------
// Greedy
// ---------------------------------------------------------------------------

std::vector<int> GreedyAgent::act(Environment& env, bool explore) {
  (void)explore;  // greedy never explores
  JointAction action = env.hover_action();
  const auto subs = env.enumerate_subactions();
  for (const auto& sub : subs) {
    double best_value = -std::numeric_limits<double>::infinity();
    int best_choice = 0;
    for (int c = 0; c < sub.domain; ++c) {
      switch (sub.kind) {
        case SubActionKind::kBsMove:
          action.bs_move = c;
          break;
        case SubActionKind::kUeMove:
          action.ue_moves[sub.area_slot * env.ues_per_area() + sub.ue_slot] = c;
          break;
        case SubActionKind::kAreaResolution:
          action.area_resolutions[sub.area_slot] = c;
          break;
        case SubActionKind::kUePower:
          action.ue_power_levels[sub.area_slot * env.ues_per_area() +
                                 sub.ue_slot] = c;
          break;
      }
      const double value = env.evaluate_action(action);
      if (value > best_value) {
        best_value = value;
        best_choice = c;
      }
    }
    switch (sub.kind) {
      case SubActionKind::kBsMove:
        action.bs_move = best_choice;
        break;
      case SubActionKind::kUeMove:
        action.ue_moves[sub.area_slot * env.ues_per_area() + sub.ue_slot] =
            best_choice;
        break;
      case SubActionKind::kAreaResolution:
        action.area_resolutions[sub.area_slot] = best_choice;
        break;
      case SubActionKind::kUePower:
        action.ue_power_levels[sub.area_slot * env.ues_per_area() +
                               sub.ue_slot] = best_choice;
        break;
    }
  }
  return env.heads_from_action(action);
}

// ---------------------------------------------------------------------------
// Tabular Q
// ---------------------------------------------------------------------------

TabularQAgent::TabularQAgent(std::vector<int> head_domains, double alpha,
                             double gamma, EpsilonSchedule eps,
                             std::uint64_t run_seed)
    : head_domains_(std::move(head_domains)),
      alpha_(alpha),
      gamma_(gamma),
      eps_(eps),
      explore_rng_(make_stream(run_seed, Stream::kExploration)) {}

std::vector<std::vector<double>>& TabularQAgent::row(const Key& key) {
  auto it = table_.find(key);
  if (it == table_.end()) {
    std::vector<std::vector<double>> fresh;
    fresh.reserve(head_domains_.size());
    for (int d : head_domains_) fresh.emplace_back(d, 0.0);
    it = table_.emplace(key, std::move(fresh)).first;
  }
  return it->second;
}

std::vector<int> TabularQAgent::act(Environment& env, bool explore) {
  const Key key = env.discrete_key();
  last_act_key_ = key;
  const auto mask = env.active_head_mask();
  auto& values = row(key);
  const double eps = explore ? eps_.at(train_steps_) : 0.0;
  std::vector<int> choices(head_domains_.size(), -1);
  for (size_t h = 0; h < head_domains_.size(); ++h) {
    if (!mask[h]) continue;
    if (explore && explore_rng_.uniform() < eps) {
      choices[h] = static_cast<int>(
          explore_rng_.bounded(static_cast<std::uint64_t>(head_domains_[h])));
    } else {
      choices[h] = argmax_range(values[h]);
    }
  }
  return choices;
}

void TabularQAgent::observe(const Environment& env, const Transition& t) {
  Pending p;
  p.key_s = last_act_key_;
  p.key_s2 = env.discrete_key();
  p.action = t.action;
  p.reward = t.reward;
  pending_ = std::move(p);
  ++train_steps_;
}

void TabularQAgent::learn() {
  if (!pending_.has_value()) return;
  const Pending& p = *pending_;
  auto& values_s = row(p.key_s);
  auto& values_s2 = row(p.key_s2);
  for (size_t h = 0; h < head_domains_.size(); ++h) {
    const int a = h < p.action.size() ? p.action[h] : -1;
    if (a < 0) continue;
    double max_next = -std::numeric_limits<double>::infinity();
    for (double v : values_s2[h]) max_next = std::max(max_next, v);
    values_s[h][a] = q_update(values_s[h][a], alpha_, p.reward, gamma_,
                              max_next);
  }
  pending_.reset();
}

void TabularQAgent::save(const std::string& path) const {
  json entries = json::array();
  for (const auto& [key, values] : table_) {
    entries.push_back(json{{"key", key}, {"q", values}});
  }
  write_file(path, json{{"kind", "tabular"},
                        {"head_domains", head_domains_},
                        {"alpha", alpha_},
                        {"gamma", gamma_},
                        {"table", entries}}
                       .dump());
}

void TabularQAgent::load(const std::string& path) {
  const json j = json::parse(read_file(path));
  head_domains_ = j.at("head_domains").get<std::vector<int>>();
  alpha_ = j.at("alpha").get<double>();
  gamma_ = j.at("gamma").get<double>();
  table_.clear();
  for (const auto& e : j.at("table")) {
    table_[e.at("key").get<Key>()] =
        e.at("q").get<std::vector<std::vector<double>>>();
  }
}

// ---------------------------------------------------------------------------
// DQN
// ---------------------------------------------------------------------------

namespace {

std::vector<int> mlp_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(out);
  return sizes;
}

}  // namespace

DqnAgent::DqnAgent(int state_dim, std::vector<int> head_domains,
                   DqnOptions opt, std::uint64_t run_seed)
    : head_domains_(std::move(head_domains)),
      head_offsets_(offsets_of(head_domains_)),
      opt_(std::move(opt)),
      replay_(static_cast<size_t>(opt_.replay_capacity)),
      explore_rng_(make_stream(run_seed, Stream::kExploration)) {
  RandomStream init = make_stream(run_seed, Stream::kInit);
  online_ = Mlp::make(mlp_sizes(state_dim, opt_.hidden, head_offsets_.back()),
                      init);
  target_ = online_;
  adam_ = AdamState::make(online_, opt_.adam_lr);
}

std::vector<int> DqnAgent::act_on(const std::vector<double>& state,
                                  const std::vector<std::uint8_t>& active,
                                  bool explore) {
  const std::vector<double> q = forward(online_, state);
  const double eps = explore ? opt_.eps.at(train_steps_) : 0.0;
  std::vector<int> choices(head_domains_.size(), -1);
  for (size_t h = 0; h < head_domains_.size(); ++h) {
    if (!active[h]) continue;
    if (explore && explore_rng_.uniform() < eps) {
      choices[h] = static_cast<int>(
          explore_rng_.bounded(static_cast<std::uint64_t>(head_domains_[h])));
    } else {
      choices[h] = argmax_range(
          std::span(q).subspan(head_offsets_[h], head_domains_[h]));
    }
  }
  return choices;
}

std::vector<int> DqnAgent::act(Environment& env, bool explore) {
  return act_on(env.state(), env.active_head_mask(), explore);
}

void DqnAgent::observe(const Environment& env, const Transition& t) {
  (void)env;
  replay_.push(t);
  ++train_steps_;
}

void DqnAgent::learn() {
  if (train_steps_ == 0 || train_steps_ % opt_.learn_every != 0) return;
  learn_minibatch();
}

std::optional<double> DqnAgent::learn_minibatch() {
  const auto picks =
      replay_.sample_indices(static_cast<size_t>(opt_.minibatch), explore_rng_);
  if (picks.empty()) return std::nullopt;  // underfull buffer: skip

  Gradients grads = Gradients::zeros_like(online_);
  double loss_sum = 0.0;
  long residuals = 0;
  // first pass to count active heads so the loss is a proper mean
  for (size_t idx : picks) {
    for (int a : replay_.at(idx).action) {
      if (a >= 0) ++residuals;
    }
  }
  if (residuals == 0) return std::nullopt;

  for (size_t idx : picks) {
    const Transition& t = replay_.at(idx);
    ForwardCache cache;
    const std::vector<double> q_s = forward(online_, t.state, &cache);
    const std::vector<double> q_next = forward(target_, t.next_state);
    std::vector<double> upstream(q_s.size(), 0.0);
    for (size_t h = 0; h < head_domains_.size(); ++h) {
      const int a = h < t.action.size() ? t.action[h] : -1;
      if (a < 0) continue;
      double max_next = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < head_domains_[h]; ++c) {
        max_next = std::max(max_next, q_next[head_offsets_[h] + c]);
      }
      const double q_tar = t.reward + opt_.gamma * max_next;
      const double q_sa = q_s[head_offsets_[h] + a];
      const double residual = q_sa - q_tar;
      loss_sum += residual * residual;
      // L = mean over (sample, head) of 1/2 residual^2
      upstream[head_offsets_[h] + a] =
          residual / static_cast<double>(residuals);
    }
    grads.add(backward(online_, cache, upstream));
  }
  clip_global_norm(grads, opt_.grad_clip_norm);
  adam_step(online_, adam_, grads);
  ++learn_steps_;
  if (learn_steps_ % opt_.target_sync_period == 0) target_ = online_;
  return loss_sum / static_cast<double>(residuals);
}

void DqnAgent::save(const std::string& path) const {
  write_file(path, json{{"kind", "dqn"},
                        {"head_domains", head_domains_},
                        {"online", json::parse(mlp_to_json(online_))},
                        {"target", json::parse(mlp_to_json(target_))},
                        {"train_steps", train_steps_},
                        {"learn_steps", learn_steps_}}
                       .dump());
}

void DqnAgent::load(const std::string& path) {
  const json j = json::parse(read_file(path));
  if (j.at("kind") != "dqn") {
    throw std::runtime_error("checkpoint kind mismatch: expected dqn");
  }
  head_domains_ = j.at("head_domains").get<std::vector<int>>();
  head_offsets_ = offsets_of(head_domains_);
  online_ = mlp_from_json(j.at("online").dump());
  target_ = mlp_from_json(j.at("target").dump());
  train_steps_ = j.at("train_steps").get<long>();
  learn_steps_ = j.at("learn_steps").get<long>();
  adam_ = AdamState::make(online_, opt_.adam_lr);
}

// ---------------------------------------------------------------------------
// Actor-Critic
// ---------------------------------------------------------------------------

AcAgent::AcAgent(int state_dim, std::vector<int> head_domains, AcOptions opt,
                 std::uint64_t run_seed)
    : head_domains_(std::move(head_domains)),
      head_offsets_(offsets_of(head_domains_)),
      opt_(std::move(opt)),
      explore_rng_(make_stream(run_seed, Stream::kExploration)) {
  RandomStream init = make_stream(run_seed, Stream::kInit);
  actor_ = Mlp::make(
      mlp_sizes(state_dim, opt_.actor_hidden, head_offsets_.back()), init);
  critic_ = opt_.linear_critic
                ? Mlp::make({state_dim, 1}, init)
                : Mlp::make(mlp_sizes(state_dim, opt_.critic_hidden, 1), init);
}

std::vector<int> AcAgent::act_on(const std::vector<double>& state,
                                 const std::vector<std::uint8_t>& active,
                                 bool explore) {
  const std::vector<double> logits = forward(actor_, state);
  std::vector<int> choices(head_domains_.size(), -1);
  for (size_t h = 0; h < head_domains_.size(); ++h) {
    if (!active[h]) continue;
    const auto slice =
        std::span(logits).subspan(head_offsets_[h], head_domains_[h]);
    if (explore) {
      const auto probs = softmax(slice);
      choices[h] = sample_categorical(probs, explore_rng_);
    } else {
      choices[h] = argmax_range(slice);
    }
  }
  return choices;
}

std::vector<int> AcAgent::act(Environment& env, bool explore) {
  return act_on(env.state(), env.active_head_mask(), explore);
}

void AcAgent::observe(const Environment& env, const Transition& t) {
  (void)env;
  pending_ = t;
}

void AcAgent::learn() {
  if (!pending_.has_value()) {
    throw std::logic_error("AcAgent::learn: no fresh on-policy transition");
  }
  learn_on(*pending_);
  pending_.reset();
}

AcAgent::LearnResult AcAgent::learn_on(const Transition& t) {
  LearnResult result;

  ForwardCache critic_cache;
  const double v_s = forward(critic_, t.state, &critic_cache)[0];
  const double v_s2 = forward(critic_, t.next_state)[0];
  const double delta = t.reward + opt_.gamma * (v_s2 - v_s);
  result.td_error = delta;

  // critic: w += alpha_c * delta * grad_w V(s)
  Gradients critic_grads =
      backward(critic_, critic_cache, std::vector<double>{1.0});
  critic_grads.scale(delta);
  clip_global_norm(critic_grads, opt_.grad_clip_norm);
  apply_update(critic_, critic_grads, opt_.critic_lr);

  // actor: theta += alpha_a * delta * grad ln pi(a|s)
  ForwardCache actor_cache;
  const std::vector<double> logits = forward(actor_, t.state, &actor_cache);
  std::vector<double> upstream(logits.size(), 0.0);
  double log_pi = 0.0;
  for (size_t h = 0; h < head_domains_.size(); ++h) {
    const int a = h < t.action.size() ? t.action[h] : -1;
    if (a < 0) continue;
    const auto slice =
        std::span(logits).subspan(head_offsets_[h], head_domains_[h]);
    const auto grad = log_softmax_grad(slice, a);
    for (int c = 0; c < head_domains_[h]; ++c) {
      upstream[head_offsets_[h] + c] = grad[c];
    }
    log_pi += std::log(softmax(slice)[a]);
  }
  Gradients actor_grads = backward(actor_, actor_cache, upstream);
  actor_grads.scale(delta);
  clip_global_norm(actor_grads, opt_.grad_clip_norm);
  apply_update(actor_, actor_grads, opt_.actor_lr);
  result.actor_objective = delta * log_pi;

  if (!actor_.finite() || !critic_.finite()) {
    throw TrainingDivergence("AcAgent::learn_on: parameters diverged");
  }
  return result;
}

std::vector<double> AcAgent::head_probabilities(
    const std::vector<double>& state, int head) const {
  const std::vector<double> logits = forward(actor_, state);
  return softmax(
      std::span(logits).subspan(head_offsets_[head], head_domains_[head]));
}

void AcAgent::save(const std::string& path) const {
  write_file(path, json{{"kind", "ac"},
                        {"head_domains", head_domains_},
                        {"actor", json::parse(mlp_to_json(actor_))},
                        {"critic", json::parse(mlp_to_json(critic_))}}
                       .dump());
}

void AcAgent::load(const std::string& path) {
  const json j = json::parse(read_file(path));
  if (j.at("kind") != "ac") {
    throw std::runtime_error("checkpoint kind mismatch: expected ac");
  }
  head_domains_ = j.at("head_domains").get<std::vector<int>>();
  head_offsets_ = offsets_of(head_domains_);
  actor_ = mlp_from_json(j.at("actor").dump());
  critic_ = mlp_from_json(j.at("critic").dump());
}

// ---------------------------------------------------------------------------

std::unique_ptr<Agent> make_agent(const ExperimentConfig& cfg,
                                  const Environment& env,
                                  std::uint64_t run_seed) {
  const auto& a = cfg.agent;
  EpsilonSchedule eps;
  eps.initial = a.epsilon_initial;
  eps.final_value = a.epsilon_final;
  eps.decay_fraction = a.epsilon_decay_fraction;
  eps.horizon = static_cast<long>(cfg.run.episodes) * cfg.run.ttis_per_episode;
  switch (a.kind) {
    case AgentKind::kGreedy:
      return std::make_unique<GreedyAgent>();
    case AgentKind::kTabular:
      return std::make_unique<TabularQAgent>(env.head_domains(),
                                             a.tabular_alpha, a.gamma, eps,
                                             run_seed);
    case AgentKind::kDqn: {
      DqnOptions opt;
      opt.hidden = a.dqn_hidden;
      opt.adam_lr = a.adam_lr;
      opt.gamma = a.gamma;
      opt.minibatch = a.minibatch;
      opt.replay_capacity = a.replay_capacity;
      opt.target_sync_period = a.target_sync_period;
      opt.learn_every = a.learn_every;
      opt.grad_clip_norm = a.grad_clip_norm;
      opt.eps = eps;
      return std::make_unique<DqnAgent>(env.state_size(), env.head_domains(),
                                        opt, run_seed);
    }
    case AgentKind::kAc: {
      AcOptions opt;
      opt.actor_hidden = a.actor_hidden;
      opt.critic_hidden = a.critic_hidden;
      opt.linear_critic = a.linear_critic;
      opt.actor_lr = a.actor_lr;
      opt.critic_lr = a.critic_lr;
      opt.gamma = a.gamma;
      opt.grad_clip_norm = a.grad_clip_norm;
      return std::make_unique<AcAgent>(env.state_size(), env.head_domains(),
                                       opt, run_seed);
    }
  }
  throw std::logic_error("make_agent: unreachable");
}

}  // namespace u2usim
