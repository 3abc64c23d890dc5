#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "terrasight/episode.hpp"
#include "terrasight/errors.hpp"
#include "terrasight/walker.hpp"

namespace terrasight {
namespace {

Command walk(double vx, double vy = 0.0, double yaw_rate_deg = 0.0) {
  Command c;
  c.mode = yaw_rate_deg == 0.0 ? CommandMode::Walk : CommandMode::WalkTurn;
  c.vx = vx;
  c.vy = vy;
  c.yaw_rate_deg = yaw_rate_deg;
  return c;
}

HeightField stairs_along_x() {
  TerrainFeature f;
  f.shape = FeatureShape::Staircase;
  f.x = 8.0;
  f.y = 8.0;
  f.step_length = 0.3;
  f.step_count = 8;
  f.length = f.step_length * f.step_count;
  f.width = 4.0;
  f.height = 0.1;
  f.direction = RunDirection::PosX;
  return HeightField(TerrainKind::Stairs, {f});
}

TEST(Walker, SpawnStandsAtNominalHeight) {
  const HeightField field;
  const WalkerState w = spawn_walker(field, 10.0, 10.0, 0.0);
  EXPECT_EQ(w.robot.pose.position.z(), 0.9);
  const auto local = w.robot.feet_local();
  EXPECT_NEAR(local[0].y(), 0.135, 1e-12);
  EXPECT_NEAR(local[1].y(), -0.135, 1e-12);
  EXPECT_EQ(local[0].z(), -0.9);
}

TEST(Walker, FlatWalkCoversCommandedDistance) {
  const HeightField field;
  WalkerState w = spawn_walker(field, 8.0, 10.0, 0.0);
  for (int i = 0; i < 400; ++i) {
    surrogate_step(w, walk(0.5), field);
    EXPECT_FALSE(w.body_contact);
  }
  EXPECT_NEAR(w.robot.pose.position.x() - 8.0, 4.0, 0.2);
  EXPECT_NEAR(w.robot.pose.position.y(), 10.0, 1e-9);
  EXPECT_EQ(w.robot.timestamp_ms, 8000);
}

TEST(Walker, StepInPlaceStaysPut) {
  const HeightField field;
  WalkerState w = spawn_walker(field, 10.0, 10.0, 0.3);
  for (int i = 0; i < 400; ++i) {
    surrogate_step(w, Command{}, field);
  }
  EXPECT_LT((w.robot.pose.position.head<2>() - Eigen::Vector2d(10.0, 10.0)).norm(), 0.1);
  // The feet keep lifting.
  EXPECT_TRUE(w.swinging[0] || w.swinging[1]);
}

TEST(Walker, StrideMatchesSpeedTimesCycle) {
  const HeightField field;
  WalkerState w = spawn_walker(field, 8.0, 10.0, 0.0);
  std::vector<double> touchdowns;
  bool was_swinging = false;
  for (int i = 0; i < 300; ++i) {
    surrogate_step(w, walk(0.5), field);
    if (was_swinging && !w.swinging[0]) {
      touchdowns.push_back(w.robot.feet_world[0].x());
    }
    was_swinging = w.swinging[0];
  }
  ASSERT_GE(touchdowns.size(), 5u);
  for (std::size_t k = 2; k < touchdowns.size(); ++k) {
    EXPECT_NEAR(touchdowns[k] - touchdowns[k - 1], 0.28, 0.01);
  }
}

TEST(Walker, SwingClearsTheGround) {
  const HeightField field;
  WalkerState w = spawn_walker(field, 8.0, 10.0, 0.0);
  double highest = 0.0;
  for (int i = 0; i < 100; ++i) {
    surrogate_step(w, walk(0.5), field);
    for (const auto& foot : w.robot.feet_world) {
      ASSERT_GE(foot.z(), -1e-12);
      highest = std::max(highest, foot.z());
    }
  }
  EXPECT_NEAR(highest, 0.15, 0.01);
}

TEST(Walker, StairFootholdsRestOnTreads) {
  const HeightField field = stairs_along_x();
  const WalkerConfig config;
  WalkerState w = spawn_walker(field, 7.0, 10.0, 0.0);
  std::array<bool, 2> was{false, false};
  int planted = 0;
  for (int i = 0; i < 400; ++i) {
    surrogate_step(w, walk(0.4), field);
    for (int leg = 0; leg < 2; ++leg) {
      if (was[leg] && !w.swinging[leg]) {
        const Eigen::Vector3d& f = w.robot.feet_world[leg];
        const Eigen::Vector2d heel = f.head<2>() - Eigen::Vector2d(config.foot_half_length, 0.0);
        const Eigen::Vector2d toe = f.head<2>() + Eigen::Vector2d(config.foot_half_length, 0.0);
        EXPECT_LE(field.max_height_along(heel, toe) - f.z(), config.flat_tolerance) << "step " << i;
        EXPECT_EQ(f.z(), field.height_at(f.x(), f.y()));
        ++planted;
      }
      was[leg] = w.swinging[leg];
    }
    EXPECT_FALSE(w.forefoot_touch[0] || w.forefoot_touch[1]) << "step " << i;
  }
  EXPECT_GT(planted, 10);
  // Ends on the top tread at nominal height above it.
  const Eigen::Vector3d& p = w.robot.pose.position;
  EXPECT_EQ(field.height_at(p.x(), p.y()), 0.8);
  EXPECT_NEAR(p.z() - 0.8, 0.9, 0.05);
}

TEST(Walker, SnapFootholdAvoidsRiserEdges) {
  const HeightField field = stairs_along_x();
  const WalkerConfig config;
  // Target centered on the first riser at x = 8.3.
  const Eigen::Vector3d f = snap_foothold(field, {8.3, 10.0}, {1.0, 0.0}, config);
  EXPECT_GE(std::abs(f.x() - 8.3), config.foot_half_length + config.foothold_margin - 1e-9);
  EXPECT_LE(std::abs(f.x() - 8.3), config.foothold_search + 1e-9);
}

TEST(Walker, SwingPointEndpoints) {
  SwingPlan plan;
  plan.start = {1.0, 2.0, 0.0};
  plan.target = {1.3, 2.0, 0.1};
  plan.apex = 0.3;
  EXPECT_TRUE(swing_point(plan, 0.0).isApprox(plan.start));
  EXPECT_TRUE(swing_point(plan, 1.0).isApprox(plan.target, 1e-12));
  EXPECT_NEAR(swing_point(plan, 0.5).z(), 0.3, 1e-12);
  EXPECT_NEAR(swing_point(plan, 0.5).x(), 1.15, 1e-12);
}

TEST(Walker, AccelerationIsZeroWhenStanding) {
  const HeightField field;
  WalkerState w = spawn_walker(field, 10.0, 10.0, 0.0);
  surrogate_step(w, Command{}, field);
  EXPECT_EQ(w.foot_accel[0], Eigen::Vector3d::Zero());
}

TEST(Episode, ObservationStateLayout) {
  RobotState s;
  s.pose.position = {1.0, 2.0, 0.9};
  s.pose.yaw = std::numbers::pi / 2.0;
  s.pose.linear_velocity = {0.0, 0.5, 0.0};
  s.pose.roll = 0.1;
  s.pose.pitch = -0.2;
  s.feet_world = {Eigen::Vector3d(1.1, 2.0, 0.0), Eigen::Vector3d(0.9, 2.0, 0.0)};
  const auto o = observation_state(s);
  ASSERT_EQ(o.size(), 18u);
  EXPECT_NEAR(o[0], 0.0f, 1e-6);
  EXPECT_NEAR(o[1], -0.1f, 1e-6);
  EXPECT_NEAR(o[2], -0.9f, 1e-6);
  EXPECT_NEAR(o[10], 0.5f, 1e-6);
  EXPECT_NEAR(o[11], 0.0f, 1e-6);
  EXPECT_EQ(o[16], 0.1f);
  EXPECT_EQ(o[17], -0.2f);
}

TEST(Episode, SeedScheme) {
  EXPECT_EQ(episode_seed(7, 0), 7u);
  EXPECT_EQ(episode_seed(7, 3), 4u);
  EXPECT_EQ(attempt_seed(11, 0), 11u);
  EXPECT_NE(attempt_seed(11, 1), attempt_seed(11, 2));
}

TEST(Episode, GenerationIsDeterministic) {
  EpisodeConfig config;
  config.max_steps = 20;
  const EpisodeRecord a = generate_episode(42, config);
  const EpisodeRecord b = generate_episode(42, config);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.kind, episode_terrain_kind(42, config));
  EXPECT_FALSE(generate_episode(43, config) == a);
}

TEST(Episode, StepsAreWellFormed) {
  EpisodeConfig config;
  config.max_steps = 25;
  const EpisodeRecord rec = generate_episode(5, config);
  ASSERT_FALSE(rec.steps.empty());
  ASSERT_LE(rec.steps.size(), 25u);
  for (std::size_t i = 0; i < rec.steps.size(); ++i) {
    const StepRecord& s = rec.steps[i];
    EXPECT_EQ(s.state.timestamp_ms, static_cast<std::int64_t>(20 * (i + 1)));
    EXPECT_EQ(s.depth.width(), 128);
    EXPECT_EQ(s.depth.height(), 128);
    EXPECT_EQ(s.command, command_at(rec.schedule, static_cast<int>(i)));
    EXPECT_LE(s.reward.r_accel, 0.05);
    EXPECT_GE(s.reward.r0, 0.0);
    EXPECT_LE(s.reward.r0, 1.0);
    for (double v : s.label.values()) {
      EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
    }
  }
  EXPECT_EQ(rec.termination, rec.steps.back().termination);
}

TEST(Episode, ShortEpisodeKeepsScheduleDraws) {
  EpisodeConfig shorter;
  shorter.max_steps = 10;
  const HeightField field;
  EXPECT_EQ(rollout_episode(field, 3, shorter).schedule.front(),
            [&] {
              Rng rng = make_stream(3, Stream::Commands);
              return command_schedule(rng, TerrainKind::Flat, 400).front();
            }());
}

TEST(Episode, ConfigValidation) {
  EpisodeConfig config;
  EXPECT_NO_THROW(config.validate());
  config.max_steps = 0;
  EXPECT_THROW(config.validate(), ConfigError);
  config = {};
  config.terrain_probabilities.fill(0.0);
  EXPECT_THROW(config.validate(), ConfigError);
}

}  // namespace
}  // namespace terrasight
