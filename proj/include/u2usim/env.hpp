#ifndef U2USIM_ENV_HPP
#define U2USIM_ENV_HPP

#include <cstdint>
#include <vector>

#include "u2usim/config.hpp"

// The MDP: reset/step semantics over the wildfire scenario, link budgets
// and QoE reward, plus the factorized action space the agents select
// over.

namespace u2usim {

enum class SubActionKind { kBsMove, kUeMove, kAreaResolution, kUePower };

struct SubActionInfo {
  int head = 0;  // index into the fixed head layout
  SubActionKind kind = SubActionKind::kBsMove;
  int area_slot = -1;  // -1 for the BS head
  int ue_slot = -1;
  int domain = 0;
};

// Action for one TTI, sized to the currently active set. UE-indexed
// vectors are area-major.
struct JointAction {
  int bs_move = 0;
  std::vector<int> ue_moves;
  std::vector<int> area_resolutions;
  std::vector<int> ue_power_levels;
};

struct StepMetrics {
  double qoe = 0.0;
  double delay_s = 0.0;
  double smoothness_penalty = 0.0;
  std::vector<double> ue_rate_bps;      // active UEs, area-major
  std::vector<double> ue_power_dbm;     // transmit power after FPC
  std::vector<int> area_resolution;     // active areas
  std::vector<QualityPair> ue_quality;  // q_now / q_prev per active UE
  int active_ue_count = 0;
  int clamped_moves = 0;
};

struct StepOutcome {
  std::vector<double> next_state;
  double reward = 0.0;
  StepMetrics metrics;
  bool done = false;
};

class Environment {
 public:
  explicit Environment(const ExperimentConfig& cfg);

  // Deterministic: the same seed reproduces the same episode.
  std::vector<double> reset(std::uint64_t seed);

  // One TTI: spawn fires, apply moves (clamp-to-legal), draw fading,
  // compute link budgets with mutual interference, score QoE.
  StepOutcome step(const JointAction& action);

  double evaluate_action(const JointAction& action) const;

  // -- action space ------------------------------------------------------
  static std::vector<int> head_layout(int max_areas, int ues_per_area,
                                      int resolution_count, int power_count);
  const std::vector<int>& head_domains() const { return head_domains_; }
  int head_count() const { return static_cast<int>(head_domains_.size()); }
  std::vector<std::uint8_t> active_head_mask() const;
  std::vector<SubActionInfo> enumerate_subactions() const;
  JointAction action_from_heads(const std::vector<int>& choices) const;
  std::vector<int> heads_from_action(const JointAction& action) const;
  JointAction hover_action() const;  // hover + current resolutions/powers

  // -- observation -------------------------------------------------------
  int state_size() const { return state_size_; }
  const std::vector<double>& state() const { return state_; }

  struct DecodedPoses {
    UavPose bs;
    std::vector<UavPose> ues;  // active UEs, area-major
  };
  DecodedPoses decode_poses(const std::vector<double>& state) const;

  // Tabular key: BS cell, active UE cells, per-area resolution indices.
  std::vector<int> discrete_key() const;

  // -- inspection --------------------------------------------------------
  int tti() const { return tti_; }
  int episode_length() const { return cfg_.run.ttis_per_episode; }
  bool done() const { return tti_ >= cfg_.run.ttis_per_episode; }
  int active_areas() const { return static_cast<int>(areas_.size()); }
  int ues_per_area() const { return cfg_.scenario.ues_per_area; }
  int max_areas() const { return cfg_.scenario.max_areas; }
  const UavPose& bs_pose() const { return bs_; }
  std::vector<FireArea> fires() const;
  const UavPose& ue_pose(int area_slot, int k) const;
  const FlyingRegion& ue_region(int area_slot, int k) const;
  int area_resolution(int area_slot) const;
  int ue_power_level(int area_slot, int k) const;
  double prev_qoe() const { return prev_qoe_; }
  int discarded_fires() const { return discarded_fires_; }
  const ExperimentConfig& config() const { return cfg_; }

  // Debug invariant: every pose obeys its region/safety constraints.
  bool constraints_ok() const;

 private:
  struct UeState {
    UavPose pose;
    FlyingRegion region;
    int power_idx = 0;
    double q_prev = 0.0;
    bool streamed_before = false;
  };
  struct AreaState {
    FireArea fire;
    int res_idx = 0;
    std::vector<UeState> ues;
  };

  void activate_area(const FireArea& fire);
  void rebuild_state();
  // fading_rng == nullptr pins every fading draw to 0 dB.
  void compute_link_budgets(const std::vector<UavPose>& ue_poses,
                            const std::vector<int>& power_idx,
                            const UavPose& bs, RandomStream* fading_rng,
                            std::vector<double>& rates,
                            std::vector<double>& tx_dbm) const;
  double reward_for(const std::vector<double>& rates,
                    const std::vector<int>& res_idx,
                    std::vector<QualityPair>* pairs, double* delay,
                    double* smoothness) const;

  ExperimentConfig cfg_;
  std::vector<int> head_domains_;
  int state_size_ = 0;

  RandomStream fires_rng_;
  RandomStream fading_rng_;
  UavPose bs_;
  std::vector<AreaState> areas_;
  int tti_ = 0;
  int next_fire_id_ = 0;
  int discarded_fires_ = 0;
  double prev_qoe_ = 0.0;
  std::vector<double> state_;
};

}  // namespace u2usim

#endif  // U2USIM_ENV_HPP
