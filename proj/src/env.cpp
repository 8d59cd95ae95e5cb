#include "u2usim/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "u2usim/log.hpp"

namespace u2usim {

namespace {

double encode_pos(double v, double extent) { return 2.0 * v / extent - 1.0; }
double decode_pos(double e, double extent) { return (e + 1.0) * 0.5 * extent; }

double encode_index(int idx, int count) {
  return count > 1 ? static_cast<double>(idx) / (count - 1) : 0.0;
}

// Lowest lattice altitude strictly above `floor`, capped at h_max.
double lattice_above(double floor, double step, double h_max) {
  double h = std::ceil(floor / step) * step;
  if (h <= floor + 1e-9) h += step;
  return std::min(h, h_max);
}

}  // namespace

Environment::Environment(const ExperimentConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  head_domains_ =
      head_layout(cfg_.scenario.max_areas, cfg_.scenario.ues_per_area,
                  cfg_.ladder.size(), static_cast<int>(cfg_.power_levels_dbm.size()));
  const int slots = cfg_.scenario.max_areas * cfg_.scenario.ues_per_area;
  state_size_ = 3 + 3 * slots + cfg_.scenario.max_areas + slots + 1;
  state_.assign(state_size_, 0.0);
}

std::vector<int> Environment::head_layout(int max_areas, int ues_per_area,
                                          int resolution_count,
                                          int power_count) {
  std::vector<int> domains;
  domains.push_back(kMoveCount);  // BS move
  for (int i = 0; i < max_areas * ues_per_area; ++i) {
    domains.push_back(kMoveCount);  // UE moves
  }
  for (int i = 0; i < max_areas; ++i) domains.push_back(resolution_count);
  for (int i = 0; i < max_areas * ues_per_area; ++i) {
    domains.push_back(power_count);
  }
  return domains;
}

std::vector<std::uint8_t> Environment::active_head_mask() const {
  const int max_a = cfg_.scenario.max_areas;
  const int k = cfg_.scenario.ues_per_area;
  const int active = active_areas();
  std::vector<std::uint8_t> mask(head_domains_.size(), 0);
  mask[0] = 1;
  for (int a = 0; a < active; ++a) {
    for (int u = 0; u < k; ++u) mask[1 + a * k + u] = 1;  // UE move
    mask[1 + max_a * k + a] = 1;                          // resolution
    for (int u = 0; u < k; ++u) {
      mask[1 + max_a * k + max_a + a * k + u] = 1;  // power
    }
  }
  return mask;
}

std::vector<SubActionInfo> Environment::enumerate_subactions() const {
  const int max_a = cfg_.scenario.max_areas;
  const int k = cfg_.scenario.ues_per_area;
  const int active = active_areas();
  std::vector<SubActionInfo> subs;
  subs.push_back({0, SubActionKind::kBsMove, -1, -1, kMoveCount});
  for (int a = 0; a < active; ++a) {
    for (int u = 0; u < k; ++u) {
      subs.push_back({1 + a * k + u, SubActionKind::kUeMove, a, u, kMoveCount});
    }
  }
  for (int a = 0; a < active; ++a) {
    subs.push_back({1 + max_a * k + a, SubActionKind::kAreaResolution, a, -1,
                    cfg_.ladder.size()});
  }
  for (int a = 0; a < active; ++a) {
    for (int u = 0; u < k; ++u) {
      subs.push_back({1 + max_a * k + max_a + a * k + u,
                      SubActionKind::kUePower, a, u,
                      static_cast<int>(cfg_.power_levels_dbm.size())});
    }
  }
  return subs;
}

JointAction Environment::action_from_heads(
    const std::vector<int>& choices) const {
  if (choices.size() != head_domains_.size()) {
    throw std::invalid_argument("action_from_heads: wrong tuple length");
  }
  JointAction a;
  const auto subs = enumerate_subactions();
  a.ue_moves.resize(active_areas() * ues_per_area());
  a.area_resolutions.resize(active_areas());
  a.ue_power_levels.resize(active_areas() * ues_per_area());
  for (const auto& s : subs) {
    const int choice = choices[s.head];
    if (choice < 0 || choice >= s.domain) {
      throw std::invalid_argument("action_from_heads: choice out of range");
    }
    switch (s.kind) {
      case SubActionKind::kBsMove:
        a.bs_move = choice;
        break;
      case SubActionKind::kUeMove:
        a.ue_moves[s.area_slot * ues_per_area() + s.ue_slot] = choice;
        break;
      case SubActionKind::kAreaResolution:
        a.area_resolutions[s.area_slot] = choice;
        break;
      case SubActionKind::kUePower:
        a.ue_power_levels[s.area_slot * ues_per_area() + s.ue_slot] = choice;
        break;
    }
  }
  return a;
}

std::vector<int> Environment::heads_from_action(const JointAction& a) const {
  std::vector<int> choices(head_domains_.size(), -1);
  const auto subs = enumerate_subactions();
  for (const auto& s : subs) {
    switch (s.kind) {
      case SubActionKind::kBsMove:
        choices[s.head] = a.bs_move;
        break;
      case SubActionKind::kUeMove:
        choices[s.head] = a.ue_moves.at(s.area_slot * ues_per_area() + s.ue_slot);
        break;
      case SubActionKind::kAreaResolution:
        choices[s.head] = a.area_resolutions.at(s.area_slot);
        break;
      case SubActionKind::kUePower:
        choices[s.head] =
            a.ue_power_levels.at(s.area_slot * ues_per_area() + s.ue_slot);
        break;
    }
  }
  return choices;
}

JointAction Environment::hover_action() const {
  JointAction a;
  a.bs_move = static_cast<int>(Move::kHover);
  const int k = ues_per_area();
  a.ue_moves.assign(active_areas() * k, static_cast<int>(Move::kHover));
  a.area_resolutions.resize(active_areas());
  a.ue_power_levels.resize(active_areas() * k);
  for (int s = 0; s < active_areas(); ++s) {
    a.area_resolutions[s] = areas_[s].res_idx;
    for (int u = 0; u < k; ++u) {
      a.ue_power_levels[s * k + u] = areas_[s].ues[u].power_idx;
    }
  }
  return a;
}

void Environment::activate_area(const FireArea& fire) {
  AreaState area;
  area.fire = fire;
  area.res_idx = 0;
  const auto& sc = cfg_.scenario;
  for (int k = 1; k <= sc.ues_per_area; ++k) {
    UeState ue;
    ue.region = flying_region(fire, k, sc.safety_radius, sc.region_length,
                              sc.h_max);
    // The UE flies to the center of its region, snapped onto the grid.
    ue.pose.x = snap_to_grid(0.5 * (ue.region.x_min + ue.region.x_max),
                             cfg_.grid.step_x, ue.region.x_min, ue.region.x_max);
    ue.pose.y = snap_to_grid(0.5 * (ue.region.y_min + ue.region.y_max),
                             cfg_.grid.step_y, ue.region.y_min, ue.region.y_max);
    ue.pose.h = snap_to_grid(0.5 * (ue.region.h_min + ue.region.h_max),
                             cfg_.grid.step_z, ue.region.h_min, ue.region.h_max);
    ue.power_idx = 0;
    area.ues.push_back(ue);
  }
  areas_.push_back(std::move(area));
}

std::vector<double> Environment::reset(std::uint64_t seed) {
  fires_rng_ = make_stream(seed, Stream::kFires);
  fading_rng_ = make_stream(seed, Stream::kFading);
  areas_.clear();
  tti_ = 0;
  next_fire_id_ = 0;
  discarded_fires_ = 0;
  prev_qoe_ = 0.0;

  const auto& sc = cfg_.scenario;
  bs_.x = snap_to_grid(sc.bs_start_x, cfg_.grid.step_x, 0.0, cfg_.grid.extent_x);
  bs_.y = snap_to_grid(sc.bs_start_y, cfg_.grid.step_y, 0.0, cfg_.grid.extent_y);

  // Initial fires must keep the BS start position safe; the BS altitude
  // is chosen afterwards, so the placement guard sees a ceiling-height
  // pose.
  std::vector<FireArea> placed;
  for (int i = 0; i < sc.initial_fires; ++i) {
    auto fire = place_fire(sc, cfg_.grid, placed, next_fire_id_, fires_rng_, 0,
                           UavPose{bs_.x, bs_.y, sc.h_max});
    if (fire.has_value()) {
      ++next_fire_id_;
      placed.push_back(*fire);
    } else {
      ++discarded_fires_;
      U2USIM_LOG_WARN("reset: initial fire %d could not be placed", i);
    }
  }
  for (const auto& f : placed) activate_area(f);

  // Deploy strictly above the tallest fire (lowest legal lattice height).
  bs_.h = lattice_above(max_fire_height(fires()), cfg_.grid.step_z, sc.h_max);

  rebuild_state();
  return state_;
}

std::vector<FireArea> Environment::fires() const {
  std::vector<FireArea> f;
  f.reserve(areas_.size());
  for (const auto& a : areas_) f.push_back(a.fire);
  return f;
}

const UavPose& Environment::ue_pose(int area_slot, int k) const {
  return areas_.at(area_slot).ues.at(k).pose;
}

const FlyingRegion& Environment::ue_region(int area_slot, int k) const {
  return areas_.at(area_slot).ues.at(k).region;
}

int Environment::area_resolution(int area_slot) const {
  return areas_.at(area_slot).res_idx;
}

int Environment::ue_power_level(int area_slot, int k) const {
  return areas_.at(area_slot).ues.at(k).power_idx;
}

void Environment::compute_link_budgets(const std::vector<UavPose>& ue_poses,
                                       const std::vector<int>& power_idx,
                                       const UavPose& bs,
                                       RandomStream* fading_rng,
                                       std::vector<double>& rates,
                                       std::vector<double>& tx_dbm) const {
  const size_t n = ue_poses.size();
  std::vector<double> rx_mw(n, 0.0);
  rates.assign(n, 0.0);
  tx_dbm.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double d =
        std::max(distance_3d(ue_poses[i], bs), cfg_.channel.min_link_distance);
    const double pl = pathloss_los_db(d, cfg_.channel);
    const double p_max = cfg_.power_levels_dbm.at(power_idx[i]);
    tx_dbm[i] = tx_power_fpc_dbm(p_max, pl, cfg_.channel);
    // one draw per active UE per TTI, in slot order
    const double fading_db =
        fading_rng != nullptr
            ? sample_rician_fading(cfg_.channel, *fading_rng).fading_db
            : 0.0;
    rx_mw[i] = received_power_mw(tx_dbm[i], d, fading_db, cfg_.channel);
  }
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> interferers;
    interferers.reserve(n - 1);
    for (size_t m = 0; m < n; ++m) {
      if (m != i) interferers.push_back(rx_mw[m]);
    }
    rates[i] = sinr_and_rate(rx_mw[i], interferers, cfg_.channel).second;
  }
}

double Environment::reward_for(const std::vector<double>& rates,
                               const std::vector<int>& res_idx,
                               std::vector<QualityPair>* pairs_out,
                               double* delay_out, double* smoothness_out) const {
  const int k = ues_per_area();
  std::vector<QualityPair> pairs;
  std::vector<double> times;
  for (int a = 0; a < active_areas(); ++a) {
    const auto& entry = cfg_.ladder.at(res_idx[a]);
    for (int u = 0; u < k; ++u) {
      const double rate = rates[a * k + u];
      QualityPair q;
      q.q_now = quality(rate, entry);
      q.q_prev = areas_[a].ues[u].streamed_before ? areas_[a].ues[u].q_prev
                                                  : q.q_now;
      pairs.push_back(q);
      times.push_back(frame_tx_time_s(entry, rate, cfg_.qoe));
    }
  }
  const double delay = slot_delay_s(times, cfg_.qoe);
  const QoeResult res =
      qoe_reward(pairs, delay, cfg_.qoe, active_areas(), k);
  if (pairs_out != nullptr) *pairs_out = std::move(pairs);
  if (delay_out != nullptr) *delay_out = delay;
  if (smoothness_out != nullptr) *smoothness_out = res.smoothness_penalty;
  return res.reward;
}

StepOutcome Environment::step(const JointAction& action) {
  if (done()) throw std::logic_error("step: episode is over, call reset");
  const int k = ues_per_area();
  const int pre_active = active_areas();
  if (static_cast<int>(action.ue_moves.size()) != pre_active * k ||
      static_cast<int>(action.area_resolutions.size()) != pre_active ||
      static_cast<int>(action.ue_power_levels.size()) != pre_active * k) {
    throw std::invalid_argument("step: action not sized to the active set");
  }
  for (int m : action.ue_moves) {
    if (m < 0 || m >= kMoveCount) {
      throw std::invalid_argument("step: ue_move out of range");
    }
  }
  if (action.bs_move < 0 || action.bs_move >= kMoveCount) {
    throw std::invalid_argument("step: bs_move out of range");
  }
  for (int r : action.area_resolutions) {
    if (r < 0 || r >= cfg_.ladder.size()) {
      throw std::invalid_argument("step: resolution out of range");
    }
  }
  for (int p : action.ue_power_levels) {
    if (p < 0 || p >= static_cast<int>(cfg_.power_levels_dbm.size())) {
      throw std::invalid_argument("step: power level out of range");
    }
  }

  StepOutcome out;

  // 1. fire arrivals; their UEs activate at region centers this TTI
  const auto spawn = spawn_fires(cfg_.scenario, cfg_.grid, fires(),
                                 next_fire_id_, fires_rng_, tti_, bs_);
  for (const auto& f : spawn.spawned) {
    activate_area(f);
    ++next_fire_id_;
  }
  discarded_fires_ += spawn.discarded;
  // A fire taller than the current BS altitude forces an immediate climb
  // to the lowest legal lattice height.
  const double h_floor = max_fire_height(fires());
  if (!areas_.empty() && bs_.h <= h_floor) {
    bs_.h = lattice_above(h_floor, cfg_.grid.step_z, cfg_.scenario.h_max);
  }

  // 2. moves, clamp-to-legal
  const auto fire_list = fires();
  const auto bs_legal = [&](const UavPose& p) {
    return safety_ok(p, fire_list, cfg_.scenario.safety_radius,
                     cfg_.scenario.h_max);
  };
  auto bs_moved = apply_move(bs_, static_cast<Move>(action.bs_move), cfg_.grid,
                             bs_legal);
  bs_ = bs_moved.pose;
  out.metrics.clamped_moves += bs_moved.clamped ? 1 : 0;
  for (int a = 0; a < pre_active; ++a) {
    for (int u = 0; u < k; ++u) {
      auto& ue = areas_[a].ues[u];
      const Move move = static_cast<Move>(action.ue_moves[a * k + u]);
      if (cfg_.scenario.same_altitude &&
          (move == Move::kZPos || move == Move::kZNeg)) {
        ++out.metrics.clamped_moves;  // altitude is pinned per area
        continue;
      }
      const auto legal = [&](const UavPose& p) { return ue.region.contains(p); };
      auto moved = apply_move(ue.pose, move, cfg_.grid, legal);
      ue.pose = moved.pose;
      out.metrics.clamped_moves += moved.clamped ? 1 : 0;
    }
  }
  for (int a = 0; a < pre_active; ++a) {
    areas_[a].res_idx = action.area_resolutions[a];
    for (int u = 0; u < k; ++u) {
      areas_[a].ues[u].power_idx = action.ue_power_levels[a * k + u];
    }
  }

  // 3-4. link budgets with mutual interference, rates and QoE terms
  std::vector<UavPose> poses;
  std::vector<int> power_idx;
  std::vector<int> res_idx;
  for (int a = 0; a < active_areas(); ++a) {
    res_idx.push_back(areas_[a].res_idx);
    for (int u = 0; u < k; ++u) {
      poses.push_back(areas_[a].ues[u].pose);
      power_idx.push_back(areas_[a].ues[u].power_idx);
    }
  }
  std::vector<double> rates;
  std::vector<double> tx_dbm;
  compute_link_budgets(poses, power_idx, bs_, &fading_rng_, rates, tx_dbm);

  // 5. reward
  std::vector<QualityPair> pairs;
  double delay = 0.0;
  double smoothness = 0.0;
  out.reward = reward_for(rates, res_idx, &pairs, &delay, &smoothness);

  for (int a = 0; a < active_areas(); ++a) {
    for (int u = 0; u < k; ++u) {
      areas_[a].ues[u].q_prev = pairs[a * k + u].q_now;
      areas_[a].ues[u].streamed_before = true;
    }
  }
  prev_qoe_ = out.reward;

  // 6. advance time
  ++tti_;
  out.done = done();

  out.metrics.qoe = out.reward;
  out.metrics.delay_s = delay;
  out.metrics.smoothness_penalty = smoothness;
  out.metrics.ue_rate_bps = std::move(rates);
  out.metrics.ue_power_dbm = std::move(tx_dbm);
  out.metrics.area_resolution = std::move(res_idx);
  out.metrics.ue_quality = std::move(pairs);
  out.metrics.active_ue_count = active_areas() * k;

  rebuild_state();
  out.next_state = state_;
  return out;
}

double Environment::evaluate_action(const JointAction& action) const {
  const int k = ues_per_area();
  const int active = active_areas();
  if (static_cast<int>(action.ue_moves.size()) != active * k ||
      static_cast<int>(action.area_resolutions.size()) != active ||
      static_cast<int>(action.ue_power_levels.size()) != active * k) {
    throw std::invalid_argument(
        "evaluate_action: action not sized to the active set");
  }
  const auto fire_list = fires();
  const auto bs_legal = [&](const UavPose& p) {
    return safety_ok(p, fire_list, cfg_.scenario.safety_radius,
                     cfg_.scenario.h_max);
  };
  UavPose bs = apply_move(bs_, static_cast<Move>(action.bs_move), cfg_.grid,
                          bs_legal)
                   .pose;
  std::vector<UavPose> poses;
  std::vector<int> power_idx;
  for (int a = 0; a < active; ++a) {
    for (int u = 0; u < k; ++u) {
      const auto& ue = areas_[a].ues[u];
      const Move move = static_cast<Move>(action.ue_moves[a * k + u]);
      UavPose p = ue.pose;
      if (!cfg_.scenario.same_altitude ||
          (move != Move::kZPos && move != Move::kZNeg)) {
        const auto legal = [&](const UavPose& q) {
          return ue.region.contains(q);
        };
        p = apply_move(ue.pose, move, cfg_.grid, legal).pose;
      }
      poses.push_back(p);
      power_idx.push_back(action.ue_power_levels[a * k + u]);
    }
  }
  std::vector<double> rates;
  std::vector<double> tx_dbm;
  compute_link_budgets(poses, power_idx, bs, nullptr, rates, tx_dbm);
  return reward_for(rates, action.area_resolutions, nullptr, nullptr, nullptr);
}

void Environment::rebuild_state() {
  const int max_a = cfg_.scenario.max_areas;
  const int k = cfg_.scenario.ues_per_area;
  state_.assign(state_size_, 0.0);
  state_[0] = encode_pos(bs_.x, cfg_.grid.extent_x);
  state_[1] = encode_pos(bs_.y, cfg_.grid.extent_y);
  state_[2] = encode_pos(bs_.h, cfg_.grid.extent_z);
  for (int a = 0; a < active_areas(); ++a) {
    for (int u = 0; u < k; ++u) {
      const int base = 3 + 3 * (a * k + u);
      const auto& pose = areas_[a].ues[u].pose;
      state_[base + 0] = encode_pos(pose.x, cfg_.grid.extent_x);
      state_[base + 1] = encode_pos(pose.y, cfg_.grid.extent_y);
      state_[base + 2] = encode_pos(pose.h, cfg_.grid.extent_z);
    }
    state_[3 + 3 * max_a * k + a] = encode_index(areas_[a].res_idx,
                                                 cfg_.ladder.size());
    for (int u = 0; u < k; ++u) {
      state_[3 + 3 * max_a * k + max_a + a * k + u] =
          encode_index(areas_[a].ues[u].power_idx,
                       static_cast<int>(cfg_.power_levels_dbm.size()));
    }
  }
  state_[state_size_ - 1] = std::tanh(prev_qoe_);
}

Environment::DecodedPoses Environment::decode_poses(
    const std::vector<double>& state) const {
  const int k = cfg_.scenario.ues_per_area;
  DecodedPoses out;
  const auto snap = [](double v, double step) {
    return std::round(v / step) * step;
  };
  out.bs.x = snap(decode_pos(state[0], cfg_.grid.extent_x), cfg_.grid.step_x);
  out.bs.y = snap(decode_pos(state[1], cfg_.grid.extent_y), cfg_.grid.step_y);
  out.bs.h = snap(decode_pos(state[2], cfg_.grid.extent_z), cfg_.grid.step_z);
  for (int a = 0; a < active_areas(); ++a) {
    for (int u = 0; u < k; ++u) {
      const int base = 3 + 3 * (a * k + u);
      UavPose p;
      p.x = snap(decode_pos(state[base + 0], cfg_.grid.extent_x),
                 cfg_.grid.step_x);
      p.y = snap(decode_pos(state[base + 1], cfg_.grid.extent_y),
                 cfg_.grid.step_y);
      p.h = snap(decode_pos(state[base + 2], cfg_.grid.extent_z),
                 cfg_.grid.step_z);
      out.ues.push_back(p);
    }
  }
  return out;
}

std::vector<int> Environment::discrete_key() const {
  const int k = cfg_.scenario.ues_per_area;
  std::vector<int> key;
  key.push_back(static_cast<int>(std::lround(bs_.x / cfg_.grid.step_x)));
  key.push_back(static_cast<int>(std::lround(bs_.y / cfg_.grid.step_y)));
  key.push_back(static_cast<int>(std::lround(bs_.h / cfg_.grid.step_z)));
  for (int a = 0; a < cfg_.scenario.max_areas; ++a) {
    for (int u = 0; u < k; ++u) {
      if (a < active_areas()) {
        const auto& pose = areas_[a].ues[u].pose;
        key.push_back(static_cast<int>(std::lround(pose.x / cfg_.grid.step_x)));
        key.push_back(static_cast<int>(std::lround(pose.y / cfg_.grid.step_y)));
        key.push_back(static_cast<int>(std::lround(pose.h / cfg_.grid.step_z)));
      } else {
        key.push_back(-1);
        key.push_back(-1);
        key.push_back(-1);
      }
    }
    key.push_back(a < active_areas() ? areas_[a].res_idx : -1);
  }
  return key;
}

bool Environment::constraints_ok() const {
  if (!safety_ok(bs_, fires(), cfg_.scenario.safety_radius,
                 cfg_.scenario.h_max) &&
      !areas_.empty()) {
    return false;
  }
  if (!cfg_.grid.contains(bs_.x, bs_.y, bs_.h)) return false;
  for (const auto& area : areas_) {
    for (const auto& ue : area.ues) {
      if (!ue.region.contains(ue.pose)) return false;
      if (!cfg_.grid.contains(ue.pose.x, ue.pose.y, ue.pose.h)) return false;
    }
    if (cfg_.scenario.same_altitude) {
      for (const auto& ue : area.ues) {
        if (ue.pose.h != area.ues.front().pose.h) return false;
      }
    }
  }
  return true;
}

}  // namespace u2usim
