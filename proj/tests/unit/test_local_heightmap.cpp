#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "terrasight/errors.hpp"
#include "terrasight/local_heightmap.hpp"

namespace terrasight {
namespace {

BasePose pose_at(double x, double y, double z, double yaw = 0.0) {
  BasePose p;
  p.position = {x, y, z};
  p.yaw = yaw;
  return p;
}

TEST(WrapAngle, RangeIsHalfOpen) {
  EXPECT_EQ(wrap_angle(std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(wrap_angle(-std::numbers::pi), std::numbers::pi, 1e-15);
  EXPECT_NEAR(wrap_angle(3.0 * std::numbers::pi / 2.0), -std::numbers::pi / 2.0, 1e-15);
  EXPECT_EQ(wrap_angle(0.25), 0.25);
}

TEST(ExtractHeightmap, FlatTerrainIsMinusBaseHeight) {
  const HeightField field;
  const LocalHeightmap hm = extract_heightmap(field, pose_at(10.0, 10.0, 0.9, 0.3));
  ASSERT_EQ(hm.values().size(), 600u);
  for (double v : hm.values()) {
    EXPECT_EQ(v, -0.9);
  }
}

TEST(ExtractHeightmap, BlockAheadOfTheRobot) {
  TerrainFeature block;
  block.shape = FeatureShape::Block;
  block.x = 10.5;
  block.y = 9.8;
  block.length = 1.0;
  block.width = 0.4;
  block.height = 0.3;
  const HeightField field(TerrainKind::Blocks, {block});
  const LocalHeightmap hm = extract_heightmap(field, pose_at(10.0, 10.0, 0.9));
  for (int row = 0; row < LocalHeightmap::kRows; ++row) {
    for (int col = 0; col < LocalHeightmap::kCols; ++col) {
      const double fwd = LocalHeightmap::forward_coordinate(row);
      const double lat = LocalHeightmap::lateral_coordinate(col);
      const bool on_block = fwd >= 0.5 && fwd < 1.5 && lat >= -0.2 && lat < 0.2;
      EXPECT_NEAR(hm.at(row, col), on_block ? -0.6 : -0.9, 1e-15) << row << "," << col;
    }
  }
}

TEST(ExtractHeightmap, MatchesBruteForceOracleExactly) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const oracle::Scene s = oracle::random_scene(seed);
    const LocalHeightmap fast = extract_heightmap(s.field, s.pose);
    const LocalHeightmap slow = oracle::brute_heightmap(s.field, s.pose);
    EXPECT_EQ(fast, slow) << "seed " << seed;
  }
}

TEST(ExtractHeightmap, Yaw90Equivariance) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const oracle::Scene s = oracle::random_scene(seed);
    const LocalHeightmap a = extract_heightmap(s.field, s.pose);
    const LocalHeightmap b = extract_heightmap(oracle::rotate90(s.field), oracle::rotate90(s.pose));
    if (s.field.hills().empty()) {
      EXPECT_EQ(a, b) << "seed " << seed;
    } else {
      for (int i = 0; i < LocalHeightmap::kSize; ++i) {
        EXPECT_NEAR(a.values()[i], b.values()[i], 1e-9) << "seed " << seed;
      }
    }
  }
}

TEST(ExtractHeightmap, ZShiftCovariance) {
  Rng rng(4);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const oracle::Scene s = oracle::random_scene(seed);
    BasePose raised = s.pose;
    const double delta = rng.uniform(-0.5, 0.5);
    raised.position.z() += delta;
    const LocalHeightmap a = extract_heightmap(s.field, s.pose);
    const LocalHeightmap b = extract_heightmap(s.field, raised);
    for (int i = 0; i < LocalHeightmap::kSize; ++i) {
      EXPECT_NEAR(b.values()[i], a.values()[i] - delta, 1e-12);
    }
  }
}

TEST(ExtractHeightmap, RollAndPitchDoNotRotateTheWindow) {
  const oracle::Scene s = oracle::random_scene(11);
  BasePose tilted = s.pose;
  tilted.roll = 0.2;
  tilted.pitch = -0.15;
  EXPECT_EQ(extract_heightmap(s.field, s.pose), extract_heightmap(s.field, tilted));
}

TEST(ExtractHeightmap, WindowOffTheMapThrows) {
  const HeightField field;
  EXPECT_THROW(extract_heightmap(field, pose_at(19.0, 10.0, 0.9)), OutOfMapError);
  EXPECT_THROW(extract_heightmap(field, pose_at(10.0, 0.2, 0.9)), OutOfMapError);
  EXPECT_NO_THROW(extract_heightmap(field, pose_at(18.4, 10.0, 0.9)));
}

TEST(HeightmapNoise, ZeroOffsetsAreIdentity) {
  const oracle::Scene s = oracle::random_scene(3);
  const LocalHeightmap hm = extract_heightmap(s.field, s.pose);
  HeightmapNoiseState noise;
  noise.step_xy = 0.0;
  noise.step_z = 0.0;
  Rng rng(1);
  EXPECT_EQ(apply_randomization(hm, noise, rng), hm);
}

TEST(HeightmapNoise, PureZShiftAddsExactly) {
  const HeightField field;
  const LocalHeightmap hm = extract_heightmap(field, pose_at(10.0, 10.0, 0.9));
  const LocalHeightmap out = apply_shift(hm, {0.0, 0.0, 0.1});
  for (double v : out.values()) {
    EXPECT_EQ(v, -0.9 + 0.1);
  }
}

TEST(HeightmapNoise, XYShiftResamplesWithEdgeReplication) {
  LocalHeightmap hm;
  for (int row = 0; row < LocalHeightmap::kRows; ++row) {
    for (int col = 0; col < LocalHeightmap::kCols; ++col) {
      hm.at(row, col) = row * 100 + col;
    }
  }
  // One cell forward and one cell to the left.
  const LocalHeightmap out = apply_shift(hm, {0.05, 0.05, 0.0});
  for (int row = 0; row < LocalHeightmap::kRows; ++row) {
    for (int col = 0; col < LocalHeightmap::kCols; ++col) {
      const int r = std::min(row + 1, LocalHeightmap::kRows - 1);
      const int c = std::max(col - 1, 0);
      EXPECT_EQ(out.at(row, col), r * 100 + c);
    }
  }
}

TEST(HeightmapNoise, EpisodeDrawsInsideBounds) {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const HeightmapNoiseState s = sample_heightmap_noise(rng);
    ASSERT_LE(std::abs(s.episode.dx), 0.05);
    ASSERT_LE(std::abs(s.episode.dy), 0.05);
    ASSERT_LE(std::abs(s.episode.dz), 0.1);
    ASSERT_GE(s.delay_ms, 20.0);
    ASSERT_LE(s.delay_ms, 100.0);
  }
}

TEST(HeightmapNoise, StepZUniformOverOneHundredThousandSteps) {
  Rng rng(6);
  const HeightmapNoiseState s;
  const int n = 100000;
  std::vector<double> z(n);
  for (double& v : z) {
    v = s.sample_step(rng).dz;
    ASSERT_GE(v, -0.02);
    ASSERT_LE(v, 0.02);
  }
  std::sort(z.begin(), z.end());
  // Kolmogorov-Smirnov distance against U(-0.02, 0.02); 1% critical value.
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = (z[i] + 0.02) / 0.04;
    d = std::max({d, std::abs(cdf - static_cast<double>(i) / n), std::abs(cdf - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(n)));
}

LocalHeightmap constant_map(double v) {
  LocalHeightmap hm;
  for (double& c : hm.values()) {
    c = v;
  }
  return hm;
}

TEST(DelayedView, StaticRobotSeesTheCurrentMap) {
  const HeightField field;
  HeightmapHistory history(8);
  const LocalHeightmap hm = extract_heightmap(field, pose_at(10.0, 10.0, 0.9));
  for (int t = 1; t <= 10; ++t) {
    history.push(t * 20, hm);
  }
  EXPECT_EQ(history.delayed(200.0, 60.0), hm);
}

TEST(DelayedView, TwentyMsIsOneStepAndHundredIsFive) {
  std::vector<TimedHeightmap> h;
  for (int t = 0; t <= 10; ++t) {
    h.push_back({t * 20, constant_map(t)});
  }
  const double now = 200.0;
  EXPECT_EQ(delayed_view(h, now, 20.0).values()[0], 9.0);
  EXPECT_EQ(delayed_view(h, now, 100.0).values()[0], 5.0);
  EXPECT_EQ(delayed_view(h, now, 35.0).values()[0], 8.0);
}

TEST(DelayedView, ShortHistoryReturnsOldest) {
  HeightmapHistory history(8);
  history.push(20, constant_map(1.0));
  history.push(40, constant_map(2.0));
  EXPECT_EQ(history.delayed(40.0, 100.0).values()[0], 1.0);
}

TEST(DelayedView, RingBufferKeepsCapacity) {
  HeightmapHistory history(6);
  for (int t = 1; t <= 20; ++t) {
    history.push(t * 20, constant_map(t));
  }
  EXPECT_EQ(history.size(), 6u);
  // 100 ms at t = 400 ms is five steps back and still inside the buffer.
  EXPECT_EQ(history.delayed(400.0, 100.0).values()[0], 15.0);
}

TEST(Privileged, RangefinderOnFlatGround) {
  const HeightField field;
  const BasePose pose = pose_at(10.0, 10.0, 0.9);
  const std::vector<Eigen::Vector3d> feet = {{10.0, 10.1, 0.0}, {10.2, 9.9, 0.2}};
  const auto scans = extract_privileged(field, pose, feet);
  ASSERT_EQ(scans.size(), 2u);
  EXPECT_EQ(scans[0].rangefinder, 0.0);
  EXPECT_NEAR(scans[1].rangefinder, 0.2, 1e-15);
  for (double h : scans[0].heights) {
    EXPECT_EQ(h, -0.9);
  }
}

TEST(Privileged, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const oracle::Scene s = oracle::random_scene(seed);
    const std::vector<Eigen::Vector3d> feet = {s.pose.position + Eigen::Vector3d(0.1, 0.13, -0.8),
                                               s.pose.position + Eigen::Vector3d(-0.1, -0.13, -0.85)};
    const auto scans = extract_privileged(s.field, s.pose, feet);
    const double c = std::cos(s.pose.yaw);
    const double sn = std::sin(s.pose.yaw);
    for (std::size_t f = 0; f < feet.size(); ++f) {
      for (int row = 0; row < FootScan::kSide; ++row) {
        for (int col = 0; col < FootScan::kSide; ++col) {
          const double fwd = (5 - row) * 0.05;
          const double lat = (5 - col) * 0.05;
          const double x = feet[f].x() + c * fwd - sn * lat;
          const double y = feet[f].y() + sn * fwd + c * lat;
          EXPECT_EQ(scans[f].heights[row * FootScan::kSide + col],
                    oracle::brute_height(s.field, x, y) - s.pose.position.z());
        }
      }
      EXPECT_EQ(scans[f].rangefinder,
                std::max(0.0, feet[f].z() - oracle::brute_height(s.field, feet[f].x(), feet[f].y())));
    }
  }
}

TEST(Privileged, OffMapSamplesReplicateTheEdge) {
  TerrainFeature block;
  block.shape = FeatureShape::Block;
  block.x = 19.5;
  block.y = 5.0;
  block.length = 0.5;
  block.width = 1.0;
  block.height = 0.2;
  const HeightField field(TerrainKind::Blocks, {block});
  const std::vector<Eigen::Vector3d> feet = {{19.9, 5.5, 0.2}};
  const auto scans = extract_privileged(field, pose_at(19.5, 5.5, 1.0), feet);
  // Row 0 reaches 0.25 m past the edge at x = 20.15; clamped onto the block.
  EXPECT_NEAR(scans[0].heights[5], 0.2 - 1.0, 1e-15);
}

TEST(Mirror, SignConventionAndInvolution) {
  const oracle::Scene s = oracle::random_scene(21);
  const LocalHeightmap hm = extract_heightmap(s.field, s.pose);
  const Command cmd{CommandMode::WalkTurn, 0.5, 0.2, 10.0};
  const ClockState clock{0.3, 1.0 / 28.0, 0.1, 0.6};
  const MirroredObservation m = mirror_observation(hm, cmd, clock);
  EXPECT_EQ(m.command.vx, 0.5);
  EXPECT_EQ(m.command.vy, -0.2);
  EXPECT_EQ(m.command.yaw_rate_deg, -10.0);
  EXPECT_EQ(m.clock.shift_left, 0.6);
  EXPECT_EQ(m.clock.shift_right, 0.1);
  EXPECT_EQ(m.heightmap.at(3, 0), hm.at(3, 19));
  const MirroredObservation back = mirror_observation(m.heightmap, m.command, m.clock);
  EXPECT_EQ(back.heightmap, hm);
  EXPECT_EQ(back.command, cmd);
  EXPECT_EQ(back.clock, clock);
}

TEST(Mirror, SymmetricMapIsAFixedPoint) {
  LocalHeightmap hm;
  for (int row = 0; row < LocalHeightmap::kRows; ++row) {
    for (int col = 0; col < LocalHeightmap::kCols; ++col) {
      hm.at(row, col) = row + std::abs(col - 9.5);
    }
  }
  EXPECT_EQ(mirror_observation(hm, {}, {}).heightmap, hm);
}

}  // namespace
}  // namespace terrasight
