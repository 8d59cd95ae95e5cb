#ifndef U2USIM_SCENARIO_HPP
#define U2USIM_SCENARIO_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "u2usim/rng.hpp"

// 3D grid world, fire arrival process, fire geometry, per-UE flying
// regions and position legality.

namespace u2usim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridWorld {
  double extent_x = 5000.0;
  double extent_y = 5000.0;
  double extent_z = 100.0;
  double step_x = 50.0;
  double step_y = 50.0;
  double step_z = 5.0;

  // Throws ConfigError naming the offending field.
  void validate() const;

  bool contains(double x, double y, double h) const {
    return x >= 0.0 && x <= extent_x && y >= 0.0 && y <= extent_y &&
           h >= 0.0 && h <= extent_z;
  }
};

struct UavPose {
  double x = 0.0;
  double y = 0.0;
  double h = 0.0;
};

struct FireArea {
  int id = 0;
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 250.0;       // r_i
  double fire_height = 20.0;   // h_i
  int arrival_slot = 0;
};

// Axis-aligned box a UAV-UE may occupy while streaming one fire area.
struct FlyingRegion {
  int fire_id = 0;
  int ue_index = 1;  // 1..4, one box template per side of the fire
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double h_min = 0.0, h_max = 0.0;

  bool contains(const UavPose& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max &&
           p.h >= h_min && p.h <= h_max;
  }
};

enum class Move : int {
  kHover = 0,
  kXPos = 1,
  kXNeg = 2,
  kYPos = 3,
  kYNeg = 4,
  kZPos = 5,
  kZNeg = 6,
};
inline constexpr int kMoveCount = 7;

struct ScenarioParams {
  double lambda_a = 0.05;        // fire arrivals per TTI
  int max_areas = 5;
  int ues_per_area = 4;          // K, at most 4 (one region template per side)
  double fire_radius = 250.0;    // r_i for every spawned fire
  double safety_radius = 50.0;   // r_s
  double region_length = 200.0;  // l
  double h_max = 100.0;          // regulatory ceiling
  double fire_height_mu = 3.0;   // log-normal parameters of fire height
  double fire_height_sigma = 0.5;
  int initial_fires = 1;         // spawned at reset
  bool same_altitude = false;    // UEs of an area keep one fixed altitude
  double bs_start_x = 1250.0;
  double bs_start_y = 1250.0;

  void validate(const GridWorld& grid) const;
};

// Spawn outcome for one TTI. Fires that failed placement after the
// rejection budget are counted, not fatal.
struct SpawnResult {
  std::vector<FireArea> spawned;
  int discarded = 0;
};

// One rejection-sampled fire: the height is drawn first (log-normal,
// clipped to [1, h_max - 5]), then up to 1000 center attempts. A center
// is accepted when (a) the whole region footprint (center +-
// (r_i+r_s+l)) stays on the grid, (b) no active area overlaps (center
// distance > r_i + r_j + 2 r_s), and (c) the center keeps the current
// UAV-BS outside the new safety disk, which would otherwise strand the
// BS in an illegal pose. Returns nullopt when the attempt budget runs
// out.
std::optional<FireArea> place_fire(const ScenarioParams& params,
                                   const GridWorld& grid,
                                   const std::vector<FireArea>& active, int id,
                                   RandomStream& rng, int slot,
                                   const std::optional<UavPose>& bs);

// Poisson(lambda_a) new fires this slot, truncated so that
// active.size() + spawned <= max_areas; each placed via place_fire.
// Placement failures are discarded (logged, not fatal).
SpawnResult spawn_fires(const ScenarioParams& params, const GridWorld& grid,
                        const std::vector<FireArea>& active, int next_id,
                        RandomStream& rng, int slot,
                        const std::optional<UavPose>& bs = std::nullopt);

// The k-th (1..4) boundary box around a fire: north, west, south, east
// strips at horizontal offsets [a, b] = [r_i+r_s, r_i+r_s+l], heights
// [h_i, h_max]. k outside 1..4 throws ConfigError.
FlyingRegion flying_region(const FireArea& fire, int k, double safety_radius,
                           double region_length, double h_max);

struct MoveOutcome {
  UavPose pose;
  bool clamped = false;
};

// Translate one grid step along the move axis; if `legal` rejects the
// result the pose is unchanged and `clamped` is set.
MoveOutcome apply_move(const UavPose& pose, Move move, const GridWorld& grid,
                       const std::function<bool(const UavPose&)>& legal);

// BS legality: strictly outside every fire's safety disk, strictly above
// the tallest active fire, no higher than h_max. No fires -> vacuously
// true.
bool safety_ok(const UavPose& bs, const std::vector<FireArea>& fires,
               double safety_radius, double h_max);

double max_fire_height(const std::vector<FireArea>& fires);

// Nearest lattice multiple of `step` to `value` that lies in [lo, hi].
// Throws std::logic_error if [lo, hi] holds no lattice point.
double snap_to_grid(double value, double step, double lo, double hi);

}  // namespace u2usim

#endif  // U2USIM_SCENARIO_HPP
