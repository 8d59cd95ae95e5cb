#include "u2usim/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "u2usim/log.hpp"

namespace u2usim {

namespace {

// steps must divide extents within floating tolerance.
void check_divides(double extent, double step, const char* field) {
  const double ratio = extent / step;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError(std::string("grid.") + field +
                      ": step does not divide extent");
  }
}

}  // namespace

void GridWorld::validate() const {
  if (extent_x <= 0.0) throw ConfigError("grid.extent_x: must be > 0");
  if (extent_y <= 0.0) throw ConfigError("grid.extent_y: must be > 0");
  if (extent_z <= 0.0) throw ConfigError("grid.extent_z: must be > 0");
  if (step_x <= 0.0) throw ConfigError("grid.step_x: must be > 0");
  if (step_y <= 0.0) throw ConfigError("grid.step_y: must be > 0");
  if (step_z <= 0.0) throw ConfigError("grid.step_z: must be > 0");
  check_divides(extent_x, step_x, "step_x");
  check_divides(extent_y, step_y, "step_y");
  check_divides(extent_z, step_z, "step_z");
}

void ScenarioParams::validate(const GridWorld& grid) const {
  if (lambda_a < 0.0) throw ConfigError("scenario.lambda_a: must be >= 0");
  if (max_areas < 0) throw ConfigError("scenario.max_areas: must be >= 0");
  if (ues_per_area < 1 || ues_per_area > 4) {
    throw ConfigError("scenario.ues_per_area: must be in [1, 4]");
  }
  if (fire_radius <= 0.0) throw ConfigError("scenario.fire_radius: must be > 0");
  if (safety_radius <= 0.0) {
    throw ConfigError("scenario.safety_radius: must be > 0");
  }
  if (region_length <= 0.0) {
    throw ConfigError("scenario.region_length: must be > 0");
  }
  if (h_max <= 0.0 || h_max > grid.extent_z) {
    throw ConfigError("scenario.h_max: must be in (0, grid.extent_z]");
  }
  if (h_max <= 6.0) {
    // fire heights are clipped to [1, h_max - 5]
    throw ConfigError("scenario.h_max: must exceed 6 m");
  }
  if (fire_height_sigma < 0.0) {
    throw ConfigError("scenario.fire_height_sigma: must be >= 0");
  }
  if (initial_fires < 0 || initial_fires > max_areas) {
    throw ConfigError("scenario.initial_fires: must be in [0, max_areas]");
  }
  // Every region strip must contain a horizontal lattice point.
  if (2.0 * (fire_radius + safety_radius) < std::max(grid.step_x, grid.step_y)) {
    throw ConfigError(
        "scenario.fire_radius/safety_radius: region strips narrower than one "
        "grid step");
  }
  if (region_length < std::max(grid.step_x, grid.step_y)) {
    throw ConfigError("scenario.region_length: narrower than one grid step");
  }
  if (grid.step_z > 5.0) {
    // guarantees a lattice altitude above any clipped fire height
    throw ConfigError("grid.step_z: must be <= 5 m");
  }
  if (!grid.contains(bs_start_x, bs_start_y, 0.0)) {
    throw ConfigError("scenario.bs_start_x/y: outside the grid");
  }
}

double max_fire_height(const std::vector<FireArea>& fires) {
  double h = 0.0;
  for (const auto& f : fires) h = std::max(h, f.fire_height);
  return h;
}

double snap_to_grid(double value, double step, double lo, double hi) {
  const double lo_lattice = std::ceil(lo / step - 1e-9) * step;
  const double hi_lattice = std::floor(hi / step + 1e-9) * step;
  if (lo_lattice > hi_lattice) {
    throw std::logic_error("snap_to_grid: no lattice point in range");
  }
  const double snapped = std::round(value / step) * step;
  return std::clamp(snapped, lo_lattice, hi_lattice);
}

namespace {

bool placement_ok(double cx, double cy, const ScenarioParams& p,
                  const GridWorld& grid, const std::vector<FireArea>& active,
                  const std::optional<UavPose>& bs) {
  const double margin = p.fire_radius + p.safety_radius + p.region_length;
  if (cx - margin < 0.0 || cx + margin > grid.extent_x || cy - margin < 0.0 ||
      cy + margin > grid.extent_y) {
    return false;
  }
  for (const auto& f : active) {
    const double min_dist = p.fire_radius + f.radius + 2.0 * p.safety_radius;
    if (std::hypot(cx - f.center_x, cy - f.center_y) <= min_dist) return false;
  }
  if (bs.has_value()) {
    if (std::hypot(cx - bs->x, cy - bs->y) <= p.fire_radius + p.safety_radius) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::optional<FireArea> place_fire(const ScenarioParams& params,
                                   const GridWorld& grid,
                                   const std::vector<FireArea>& active, int id,
                                   RandomStream& rng, int slot,
                                   const std::optional<UavPose>& bs) {
  FireArea fire;
  fire.id = id;
  fire.radius = params.fire_radius;
  fire.fire_height = std::clamp(
      rng.lognormal(params.fire_height_mu, params.fire_height_sigma), 1.0,
      params.h_max - 5.0);
  fire.arrival_slot = slot;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double cx = rng.uniform(0.0, grid.extent_x);
    const double cy = rng.uniform(0.0, grid.extent_y);
    if (!placement_ok(cx, cy, params, grid, active, bs)) continue;
    fire.center_x = cx;
    fire.center_y = cy;
    return fire;
  }
  return std::nullopt;
}

SpawnResult spawn_fires(const ScenarioParams& params, const GridWorld& grid,
                        const std::vector<FireArea>& active, int next_id,
                        RandomStream& rng, int slot,
                        const std::optional<UavPose>& bs) {
  SpawnResult result;
  int count = rng.poisson(params.lambda_a);
  const int room = params.max_areas - static_cast<int>(active.size());
  count = std::min(count, std::max(0, room));

  std::vector<FireArea> occupied = active;
  for (int n = 0; n < count; ++n) {
    auto fire = place_fire(params, grid, occupied, next_id, rng, slot, bs);
    if (fire.has_value()) {
      ++next_id;
      occupied.push_back(*fire);
      result.spawned.push_back(*fire);
    } else {
      ++result.discarded;
      U2USIM_LOG_WARN(
          "spawn_fires: placement failed after 1000 attempts, fire discarded "
          "(slot %d)",
          slot);
    }
  }
  return result;
}

FlyingRegion flying_region(const FireArea& fire, int k, double safety_radius,
                           double region_length, double h_max) {
  if (k < 1 || k > 4) {
    throw ConfigError("flying_region: ue index k must be in 1..4");
  }
  const double a = fire.radius + safety_radius;
  const double b = a + region_length;
  FlyingRegion r;
  r.fire_id = fire.id;
  r.ue_index = k;
  r.h_min = fire.fire_height;
  r.h_max = h_max;
  switch (k) {
    case 1:  // north strip
      r.x_min = fire.center_x - a;
      r.x_max = fire.center_x + a;
      r.y_min = fire.center_y + a;
      r.y_max = fire.center_y + b;
      break;
    case 2:  // west strip
      r.x_min = fire.center_x - b;
      r.x_max = fire.center_x - a;
      r.y_min = fire.center_y - a;
      r.y_max = fire.center_y + a;
      break;
    case 3:  // south strip
      r.x_min = fire.center_x - a;
      r.x_max = fire.center_x + a;
      r.y_min = fire.center_y - b;
      r.y_max = fire.center_y - a;
      break;
    default:  // 4, east strip
      r.x_min = fire.center_x + a;
      r.x_max = fire.center_x + b;
      r.y_min = fire.center_y - a;
      r.y_max = fire.center_y + a;
      break;
  }
  return r;
}

MoveOutcome apply_move(const UavPose& pose, Move move, const GridWorld& grid,
                       const std::function<bool(const UavPose&)>& legal) {
  UavPose next = pose;
  switch (move) {
    case Move::kHover: break;
    case Move::kXPos: next.x += grid.step_x; break;
    case Move::kXNeg: next.x -= grid.step_x; break;
    case Move::kYPos: next.y += grid.step_y; break;
    case Move::kYNeg: next.y -= grid.step_y; break;
    case Move::kZPos: next.h += grid.step_z; break;
    case Move::kZNeg: next.h -= grid.step_z; break;
  }
  if (move != Move::kHover && grid.contains(next.x, next.y, next.h) &&
      (!legal || legal(next))) {
    return {next, false};
  }
  if (move == Move::kHover) return {pose, false};
  return {pose, true};
}

bool safety_ok(const UavPose& bs, const std::vector<FireArea>& fires,
               double safety_radius, double h_max) {
  if (fires.empty()) return true;
  for (const auto& f : fires) {
    if (std::hypot(bs.x - f.center_x, bs.y - f.center_y) <=
        f.radius + safety_radius) {
      return false;
    }
  }
  return bs.h > max_fire_height(fires) && bs.h <= h_max;
}

}  // namespace u2usim
