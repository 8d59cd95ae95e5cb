#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "u2usim/scenario.hpp"

using namespace u2usim;

namespace {

GridWorld default_grid() { return GridWorld{}; }

FireArea fire_at(double x, double y, double r = 250.0, double h = 20.0) {
  FireArea f;
  f.center_x = x;
  f.center_y = y;
  f.radius = r;
  f.fire_height = h;
  return f;
}

bool boxes_interior_overlap(const FlyingRegion& a, const FlyingRegion& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max &&
         b.y_min < a.y_max;
}

// positive-area overlap; boundary contact (up to rounding) is fine
bool box_hits_disk(const FlyingRegion& r, double cx, double cy, double rad) {
  const double nx = std::clamp(cx, r.x_min, r.x_max);
  const double ny = std::clamp(cy, r.y_min, r.y_max);
  return std::hypot(nx - cx, ny - cy) < rad - 1e-9 * std::max(1.0, rad);
}

}  // namespace

TEST_CASE("grid validation") {
  GridWorld g = default_grid();
  CHECK_NOTHROW(g.validate());
  g.step_x = 49.0;  // does not divide 5000
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = default_grid();
  g.extent_z = -1.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("flying region boxes match the four side templates") {
  const FireArea f = fire_at(0.0, 0.0, 250.0, 20.0);
  const auto north = flying_region(f, 1, 50.0, 200.0, 100.0);
  CHECK(north.x_min == doctest::Approx(-300.0));
  CHECK(north.x_max == doctest::Approx(300.0));
  CHECK(north.y_min == doctest::Approx(300.0));
  CHECK(north.y_max == doctest::Approx(500.0));

  const auto south = flying_region(f, 3, 50.0, 200.0, 100.0);
  CHECK(south.x_min == doctest::Approx(-300.0));
  CHECK(south.x_max == doctest::Approx(300.0));
  CHECK(south.y_min == doctest::Approx(-500.0));
  CHECK(south.y_max == doctest::Approx(-300.0));

  CHECK(north.h_min == doctest::Approx(20.0));
  CHECK(north.h_max == doctest::Approx(100.0));

  CHECK_THROWS_AS(flying_region(f, 0, 50.0, 200.0, 100.0), ConfigError);
  CHECK_THROWS_AS(flying_region(f, 5, 50.0, 200.0, 100.0), ConfigError);
}

TEST_CASE("flying regions are disjoint and clear the safety disk") {
  RandomStream rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const double r_i = rng.uniform(10.0, 400.0);
    const double r_s = rng.uniform(1.0, 120.0);
    const double l = rng.uniform(1.0, 300.0);
    const FireArea f = fire_at(rng.uniform(-100.0, 100.0),
                               rng.uniform(-100.0, 100.0), r_i, 15.0);
    FlyingRegion regions[4];
    for (int k = 1; k <= 4; ++k) {
      regions[k - 1] = flying_region(f, k, r_s, l, 100.0);
      CHECK(regions[k - 1].x_min < regions[k - 1].x_max);
      CHECK(regions[k - 1].y_min < regions[k - 1].y_max);
    }
    for (int i = 0; i < 4; ++i) {
      CHECK_FALSE(box_hits_disk(regions[i], f.center_x, f.center_y, r_i + r_s));
      for (int j = i + 1; j < 4; ++j) {
        CHECK_FALSE(boxes_interior_overlap(regions[i], regions[j]));
      }
    }
  }
}

TEST_CASE("apply_move basics") {
  const GridWorld grid = default_grid();
  const FireArea f = fire_at(1000.0, 1000.0);
  const auto region = flying_region(f, 1, 50.0, 200.0, 100.0);
  const auto legal = [&](const UavPose& p) { return region.contains(p); };

  UavPose pose{1000.0, 1400.0, 50.0};
  REQUIRE(region.contains(pose));

  const auto hover = apply_move(pose, Move::kHover, grid, legal);
  CHECK(hover.pose.x == pose.x);
  CHECK(hover.pose.y == pose.y);
  CHECK(hover.pose.h == pose.h);
  CHECK_FALSE(hover.clamped);

  const auto up = apply_move(pose, Move::kZPos, grid, legal);
  CHECK(up.pose.h == doctest::Approx(55.0));
  CHECK_FALSE(up.clamped);

  UavPose at_edge{region.x_max, 1400.0, 50.0};
  const auto blocked = apply_move(at_edge, Move::kXPos, grid, legal);
  CHECK(blocked.pose.x == at_edge.x);
  CHECK(blocked.clamped);
}

TEST_CASE("random walk never escapes the region") {
  const GridWorld grid = default_grid();
  const FireArea f = fire_at(2500.0, 2500.0, 250.0, 20.0);
  const auto region = flying_region(f, 4, 50.0, 200.0, 100.0);
  const auto legal = [&](const UavPose& p) { return region.contains(p); };

  UavPose pose{snap_to_grid(0.5 * (region.x_min + region.x_max), grid.step_x,
                            region.x_min, region.x_max),
               snap_to_grid(0.5 * (region.y_min + region.y_max), grid.step_y,
                            region.y_min, region.y_max),
               snap_to_grid(0.5 * (region.h_min + region.h_max), grid.step_z,
                            region.h_min, region.h_max)};
  REQUIRE(region.contains(pose));

  RandomStream rng(99);
  for (int i = 0; i < 100000; ++i) {
    const Move m = static_cast<Move>(rng.bounded(kMoveCount));
    pose = apply_move(pose, m, grid, legal).pose;
    REQUIRE(region.contains(pose));
    REQUIRE(grid.contains(pose.x, pose.y, pose.h));
  }
}

TEST_CASE("safety_ok") {
  SUBCASE("no fires is vacuously safe") {
    CHECK(safety_ok(UavPose{0, 0, 50}, {}, 50.0, 100.0));
  }
  SUBCASE("boundary distance is not strict enough") {
    const std::vector<FireArea> fires = {fire_at(0.0, 0.0, 250.0, 20.0)};
    CHECK_FALSE(safety_ok(UavPose{300.0, 0.0, 50.0}, fires, 50.0, 100.0));
    CHECK(safety_ok(UavPose{301.0, 0.0, 50.0}, fires, 50.0, 100.0));
  }
  SUBCASE("height band") {
    const std::vector<FireArea> fires = {fire_at(0.0, 0.0, 250.0, 20.0)};
    CHECK_FALSE(safety_ok(UavPose{500.0, 0.0, 20.0}, fires, 50.0, 100.0));
    CHECK_FALSE(safety_ok(UavPose{500.0, 0.0, 101.0}, fires, 50.0, 100.0));
    CHECK(safety_ok(UavPose{500.0, 0.0, 100.0}, fires, 50.0, 100.0));
  }
}

TEST_CASE("spawn_fires") {
  const GridWorld grid = default_grid();
  ScenarioParams params;

  SUBCASE("zero rate never spawns") {
    params.lambda_a = 0.0;
    RandomStream rng(1);
    for (int slot = 0; slot < 100; ++slot) {
      const auto result = spawn_fires(params, grid, {}, 0, rng, slot);
      CHECK(result.spawned.empty());
      CHECK(result.discarded == 0);
    }
  }

  SUBCASE("truncation at max_areas") {
    params.lambda_a = 50.0;  // virtually guaranteed arrivals
    params.max_areas = 5;
    RandomStream rng(2);
    std::vector<FireArea> active;
    for (int i = 0; i < 5; ++i) {
      active.push_back(fire_at(600.0 + 700.0 * i, 2500.0));
    }
    const auto result = spawn_fires(params, grid, active, 5, rng, 0);
    CHECK(result.spawned.empty());
  }

  SUBCASE("same seed, same fires") {
    params.lambda_a = 0.8;
    RandomStream rng_a(42);
    RandomStream rng_b(42);
    const auto a = spawn_fires(params, grid, {}, 0, rng_a, 3);
    const auto b = spawn_fires(params, grid, {}, 0, rng_b, 3);
    REQUIRE(a.spawned.size() == b.spawned.size());
    for (size_t i = 0; i < a.spawned.size(); ++i) {
      CHECK(a.spawned[i].center_x == b.spawned[i].center_x);
      CHECK(a.spawned[i].center_y == b.spawned[i].center_y);
      CHECK(a.spawned[i].fire_height == b.spawned[i].fire_height);
    }
  }

  SUBCASE("arrival rate matches the configured density") {
    params.lambda_a = 0.05;
    params.max_areas = 64;
    RandomStream rng(7);
    long long total = 0;
    const int slots = 1000000;
    for (int slot = 0; slot < slots; ++slot) {
      const auto result = spawn_fires(params, grid, {}, 0, rng, slot);
      total += static_cast<long long>(result.spawned.size()) + result.discarded;
    }
    const double mean = static_cast<double>(total) / slots;
    CHECK(mean == doctest::Approx(0.05).epsilon(0.02));
  }

  SUBCASE("fire heights stay in the clipped band") {
    params.lambda_a = 2.0;
    RandomStream rng(5);
    for (int slot = 0; slot < 200; ++slot) {
      const auto result = spawn_fires(params, grid, {}, 0, rng, slot);
      for (const auto& f : result.spawned) {
        CHECK(f.fire_height >= 1.0);
        CHECK(f.fire_height <= params.h_max - 5.0);
      }
    }
  }

  SUBCASE("fires keep their distance from each other and the BS") {
    params.lambda_a = 3.0;
    params.max_areas = 8;
    RandomStream rng(11);
    std::vector<FireArea> active;
    const UavPose bs{2500.0, 2500.0, 50.0};
    int next_id = 0;
    for (int slot = 0; slot < 50 && active.size() < 8; ++slot) {
      const auto result =
          spawn_fires(params, grid, active, next_id, rng, slot, bs);
      for (const auto& f : result.spawned) {
        for (const auto& g : active) {
          const double dist = std::hypot(f.center_x - g.center_x,
                                         f.center_y - g.center_y);
          CHECK(dist > f.radius + g.radius + 2.0 * params.safety_radius);
        }
        CHECK(std::hypot(f.center_x - bs.x, f.center_y - bs.y) >
              f.radius + params.safety_radius);
        active.push_back(f);
        ++next_id;
      }
    }
    CHECK(active.size() > 1);
  }
}

TEST_CASE("snap_to_grid") {
  CHECK(snap_to_grid(1250.0, 50.0, 0.0, 5000.0) == doctest::Approx(1250.0));
  CHECK(snap_to_grid(23.0, 5.0, 20.0, 100.0) == doctest::Approx(25.0));
  CHECK(snap_to_grid(97.2, 5.0, 20.0, 95.0) == doctest::Approx(95.0));
  CHECK_THROWS_AS(snap_to_grid(7.0, 5.0, 6.0, 9.0), std::logic_error);
}
