#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "u2usim/env.hpp"

using namespace u2usim;

namespace {

// Small world used across the environment tests: fits a couple of fire
// areas and keeps walks short.
ExperimentConfig toy_config() {
  ExperimentConfig cfg;
  cfg.grid.extent_x = 2000.0;
  cfg.grid.extent_y = 2000.0;
  cfg.grid.extent_z = 100.0;
  cfg.grid.step_x = 50.0;
  cfg.grid.step_y = 50.0;
  cfg.grid.step_z = 5.0;
  cfg.scenario.max_areas = 2;
  cfg.scenario.ues_per_area = 4;
  cfg.scenario.fire_radius = 250.0;
  cfg.scenario.lambda_a = 0.05;
  cfg.scenario.initial_fires = 1;
  cfg.scenario.bs_start_x = 1000.0;
  cfg.scenario.bs_start_y = 1000.0;
  cfg.run.ttis_per_episode = 50;
  return cfg;
}

JointAction random_action(const Environment& env, RandomStream& rng) {
  JointAction a;
  a.bs_move = static_cast<int>(rng.bounded(kMoveCount));
  const int n_ues = env.active_areas() * env.ues_per_area();
  for (int i = 0; i < n_ues; ++i) {
    a.ue_moves.push_back(static_cast<int>(rng.bounded(kMoveCount)));
    a.ue_power_levels.push_back(static_cast<int>(rng.bounded(3)));
  }
  for (int i = 0; i < env.active_areas(); ++i) {
    a.area_resolutions.push_back(
        static_cast<int>(rng.bounded(env.config().ladder.size())));
  }
  return a;
}

}  // namespace

TEST_CASE("reset is deterministic") {
  const ExperimentConfig cfg = toy_config();
  Environment a(cfg);
  Environment b(cfg);
  CHECK(a.reset(12345) == b.reset(12345));
  CHECK(a.reset(12345) != a.reset(54321));
}

TEST_CASE("empty scenario leaves only the BS pose in the state") {
  ExperimentConfig cfg;  // paper-scale defaults, BS at (1250, 1250)
  cfg.scenario.initial_fires = 0;
  cfg.scenario.lambda_a = 0.0;
  Environment env(cfg);
  const auto state = env.reset(7);
  CHECK(state[0] != 0.0);
  CHECK(state[1] != 0.0);
  CHECK(state[2] != 0.0);
  for (size_t i = 3; i < state.size(); ++i) CHECK(state[i] == 0.0);
}

TEST_CASE("default deployment sits at the configured centre above the fires") {
  ExperimentConfig cfg;  // defaults: 5000 m world, start (1250, 1250)
  Environment env(cfg);
  env.reset(3);
  CHECK(env.bs_pose().x == doctest::Approx(1250.0));
  CHECK(env.bs_pose().y == doctest::Approx(1250.0));
  const double h_min = max_fire_height(env.fires());
  CHECK(env.bs_pose().h > h_min);
  CHECK(env.bs_pose().h <= h_min + cfg.grid.step_z + 1e-9);
  // UEs start at the snapped centers of their regions, lowest ladder
  // rung, lowest power
  for (int a = 0; a < env.active_areas(); ++a) {
    CHECK(env.area_resolution(a) == 0);
    for (int k = 0; k < env.ues_per_area(); ++k) {
      CHECK(env.ue_region(a, k).contains(env.ue_pose(a, k)));
      CHECK(env.ue_power_level(a, k) == 0);
    }
  }
  CHECK(env.prev_qoe() == 0.0);
}

TEST_CASE("pinned fading makes steps reproducible and match evaluate_action") {
  ExperimentConfig cfg = toy_config();
  cfg.channel.rice_kappa = 1e9;  // pure LoS
  cfg.scenario.lambda_a = 0.0;   // fixed fires

  Environment env1(cfg);
  Environment env2(cfg);
  env1.reset(99);
  env2.reset(99);

  const JointAction hover = env1.hover_action();
  const double predicted = env1.evaluate_action(hover);
  const auto out1 = env1.step(hover);
  const auto out2 = env2.step(hover);
  CHECK(out1.reward == out2.reward);
  CHECK(out1.next_state == out2.next_state);
  CHECK(out1.reward == doctest::Approx(predicted).epsilon(1e-12));
}

TEST_CASE("a UE below its ladder minimum drives the reward negative") {
  ExperimentConfig cfg = toy_config();
  cfg.scenario.ues_per_area = 1;
  cfg.scenario.lambda_a = 0.0;
  cfg.channel.noise_dbm = 60.0;  // drown every link
  cfg.channel.rice_kappa = 1e9;
  Environment env(cfg);
  env.reset(5);
  REQUIRE(env.active_areas() == 1);
  const auto out = env.step(env.hover_action());
  REQUIRE(out.metrics.ue_rate_bps.size() == 1);
  CHECK(out.metrics.ue_rate_bps[0] < cfg.ladder.at(0).min_rate_bps);
  CHECK(out.reward < 0.0);
}

TEST_CASE("raising a neighbour's power strictly lowers a UE's rate") {
  ExperimentConfig cfg = toy_config();
  cfg.scenario.ues_per_area = 2;
  cfg.scenario.lambda_a = 0.0;
  cfg.channel.rice_kappa = 1e9;

  Environment env1(cfg);
  Environment env2(cfg);
  env1.reset(11);
  env2.reset(11);

  JointAction a1 = env1.hover_action();
  JointAction a2 = env2.hover_action();
  REQUIRE(a1.ue_power_levels.size() == 2);
  a1.ue_power_levels = {0, 0};
  a2.ue_power_levels = {0, 1};
  const auto out1 = env1.step(a1);
  const auto out2 = env2.step(a2);
  CHECK(out2.metrics.ue_rate_bps[0] < out1.metrics.ue_rate_bps[0]);
  CHECK(out2.metrics.ue_rate_bps[1] > out1.metrics.ue_rate_bps[1]);
}

TEST_CASE("sub-action enumeration") {
  SUBCASE("one area, four UEs") {
    ExperimentConfig cfg = toy_config();
    cfg.scenario.max_areas = 1;
    cfg.scenario.initial_fires = 1;
    Environment env(cfg);
    env.reset(1);
    REQUIRE(env.active_areas() == 1);
    const auto subs = env.enumerate_subactions();
    CHECK(subs.size() == 10);  // 1 + 4 + 1 + 4
  }
  SUBCASE("no areas leaves just the BS move") {
    ExperimentConfig cfg = toy_config();
    cfg.scenario.initial_fires = 0;
    cfg.scenario.lambda_a = 0.0;
    Environment env(cfg);
    env.reset(1);
    const auto subs = env.enumerate_subactions();
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].kind == SubActionKind::kBsMove);
    CHECK(subs[0].domain == 7);
  }
  SUBCASE("five areas, four UEs matches the joint product formula") {
    ExperimentConfig cfg;  // 5000 m defaults hold five areas
    cfg.scenario.max_areas = 5;
    cfg.scenario.initial_fires = 5;
    Environment env(cfg);
    env.reset(17);
    REQUIRE(env.active_areas() == 5);
    const auto subs = env.enumerate_subactions();
    CHECK(subs.size() == 46);  // 1 + 20 + 5 + 20
    double log_joint = 0.0;
    for (const auto& s : subs) log_joint += std::log(double(s.domain));
    const double expected = std::log(7.0) + 20.0 * std::log(7.0) +
                            5.0 * std::log(6.0) + 20.0 * std::log(3.0);
    CHECK(log_joint == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("episodes run exactly T_max TTIs") {
  ExperimentConfig cfg = toy_config();
  Environment env(cfg);
  env.reset(21);
  int steps = 0;
  while (true) {
    const auto out = env.step(env.hover_action());
    ++steps;
    if (out.done) break;
  }
  CHECK(steps == cfg.run.ttis_per_episode);
  CHECK_THROWS_AS(env.step(env.hover_action()), std::logic_error);
}

TEST_CASE("constraints hold after every step of a random episode") {
  ExperimentConfig cfg = toy_config();
  cfg.scenario.lambda_a = 0.2;  // exercise mid-episode spawns
  Environment env(cfg);
  RandomStream rng(31);
  for (int episode = 0; episode < 5; ++episode) {
    env.reset(1000 + episode);
    CHECK(env.constraints_ok());
    for (int t = 0; t < cfg.run.ttis_per_episode; ++t) {
      env.step(random_action(env, rng));
      REQUIRE(env.constraints_ok());
    }
    CHECK(env.active_areas() <= cfg.scenario.max_areas);
  }
}

TEST_CASE("state encoding stays in bounds and round-trips poses") {
  ExperimentConfig cfg = toy_config();
  cfg.scenario.lambda_a = 0.2;
  Environment env(cfg);
  RandomStream rng(37);
  env.reset(77);
  for (int t = 0; t < 30; ++t) {
    const auto out = env.step(random_action(env, rng));
    for (double v : out.next_state) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
    const auto decoded = env.decode_poses(out.next_state);
    CHECK(decoded.bs.x == doctest::Approx(env.bs_pose().x).epsilon(1e-9));
    CHECK(decoded.bs.y == doctest::Approx(env.bs_pose().y).epsilon(1e-9));
    CHECK(decoded.bs.h == doctest::Approx(env.bs_pose().h).epsilon(1e-9));
    int i = 0;
    for (int a = 0; a < env.active_areas(); ++a) {
      for (int k = 0; k < env.ues_per_area(); ++k, ++i) {
        CHECK(decoded.ues[i].x ==
              doctest::Approx(env.ue_pose(a, k).x).epsilon(1e-9));
        CHECK(decoded.ues[i].y ==
              doctest::Approx(env.ue_pose(a, k).y).epsilon(1e-9));
        CHECK(decoded.ues[i].h ==
              doctest::Approx(env.ue_pose(a, k).h).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("reward is recomputable from the step metrics") {
  ExperimentConfig cfg = toy_config();
  cfg.scenario.lambda_a = 0.3;
  Environment env(cfg);
  RandomStream rng(41);
  env.reset(55);
  for (int t = 0; t < 40; ++t) {
    const auto out = env.step(random_action(env, rng));
    const auto recomputed =
        qoe_reward(out.metrics.ue_quality, out.metrics.delay_s, cfg.qoe,
                   env.active_areas(), env.ues_per_area());
    CHECK(out.reward == recomputed.reward);
    CHECK(out.metrics.smoothness_penalty == recomputed.smoothness_penalty);
  }
}

TEST_CASE("malformed actions are rejected") {
  ExperimentConfig cfg = toy_config();
  Environment env(cfg);
  env.reset(61);
  JointAction bad = env.hover_action();
  bad.ue_moves.pop_back();
  CHECK_THROWS_AS(env.step(bad), std::invalid_argument);

  JointAction bad2 = env.hover_action();
  bad2.area_resolutions[0] = 17;
  CHECK_THROWS_AS(env.step(bad2), std::invalid_argument);
}

TEST_CASE("head tuple round trip") {
  ExperimentConfig cfg = toy_config();
  Environment env(cfg);
  env.reset(71);
  RandomStream rng(72);
  const JointAction a = random_action(env, rng);
  const auto heads = env.heads_from_action(a);
  const auto mask = env.active_head_mask();
  for (size_t h = 0; h < heads.size(); ++h) {
    CHECK((heads[h] >= 0) == (mask[h] != 0));
  }
  const JointAction back = env.action_from_heads(heads);
  CHECK(back.bs_move == a.bs_move);
  CHECK(back.ue_moves == a.ue_moves);
  CHECK(back.area_resolutions == a.area_resolutions);
  CHECK(back.ue_power_levels == a.ue_power_levels);
}

TEST_CASE("same-altitude mode pins UE heights per area") {
  ExperimentConfig cfg = toy_config();
  cfg.scenario.same_altitude = true;
  cfg.scenario.lambda_a = 0.0;
  Environment env(cfg);
  env.reset(81);
  const double h0 = env.ue_pose(0, 0).h;
  JointAction a = env.hover_action();
  for (auto& m : a.ue_moves) m = static_cast<int>(Move::kZPos);
  const auto out = env.step(a);
  CHECK(out.metrics.clamped_moves >= static_cast<int>(a.ue_moves.size()));
  for (int k = 0; k < env.ues_per_area(); ++k) {
    CHECK(env.ue_pose(0, k).h == h0);
  }
}
