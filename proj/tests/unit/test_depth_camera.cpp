#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "terrasight/depth_camera.hpp"
#include "terrasight/errors.hpp"

namespace terrasight {
namespace {

double rad(double deg) { return deg * std::numbers::pi / 180.0; }

BasePose level_pose(double x, double y, double z, double yaw = 0.0) {
  BasePose p;
  p.position = {x, y, z};
  p.yaw = yaw;
  return p;
}

TEST(CameraModel, ValidateRejectsBadOptics) {
  CameraModel c;
  EXPECT_NO_THROW(c.validate());
  c.tilt_deg = 90.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.hfov_deg = 180.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.clip_min = 4.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(CameraFrame, AxesAreOrthonormalAndTilted) {
  CameraModel cam;
  const CameraFrame f = camera_frame(level_pose(10, 10, 0.9, 0.7), cam);
  EXPECT_NEAR(f.forward.norm(), 1.0, 1e-15);
  EXPECT_NEAR(f.right.norm(), 1.0, 1e-15);
  EXPECT_NEAR(f.down.norm(), 1.0, 1e-15);
  EXPECT_NEAR(f.forward.dot(f.right), 0.0, 1e-15);
  EXPECT_NEAR(f.forward.dot(f.down), 0.0, 1e-15);
  EXPECT_NEAR(std::asin(-f.forward.z()), rad(60.0), 1e-12);
  EXPECT_NEAR(f.origin.z(), 0.95, 1e-15);
}

TEST(RenderDepth, FlatPlaneCentralPixel) {
  Rng rng(17);
  const HeightField field;
  for (int trial = 0; trial < 50; ++trial) {
    const double h = rng.uniform(0.3, 2.0);
    CameraModel cam;
    cam.tilt_deg = rng.uniform(20.0, 89.0);
    cam.mount_offset = Eigen::Vector3d::Zero();
    const DepthImage img = render_depth(field, level_pose(10, 10, h, rng.uniform(-3, 3)), cam, 129, 129);
    ASSERT_TRUE(img.valid(64, 64));
    EXPECT_NEAR(img.at(64, 64), h / std::sin(rad(cam.tilt_deg)), 1e-6);
  }
}

TEST(RenderDepth, FlatPlaneEveryPixelAnalytic) {
  const HeightField field;
  CameraModel cam;
  const BasePose pose = level_pose(10, 10, 0.9, 0.4);
  const DepthImage img = render_depth(field, pose, cam, 85, 48);
  const CameraFrame f = camera_frame(pose, cam);
  for (int j = 0; j < img.height(); ++j) {
    for (int i = 0; i < img.width(); ++i) {
      const Eigen::Vector3d d = pixel_ray(f, cam, i + 0.5, j + 0.5, img.width(), img.height());
      ASSERT_TRUE(img.valid(i, j));
      EXPECT_NEAR(img.at(i, j), f.origin.z() / -d.z(), 1e-5);
    }
  }
}

TEST(RenderDepth, VerticalWallAnalytic) {
  // A tall ridge spanning y: its face x = 11.5 is a wall 1.5 m ahead.
  TerrainFeature wall;
  wall.shape = FeatureShape::Ridge;
  wall.x = 11.5;
  wall.y = 0.0;
  wall.length = 1.0;
  wall.width = 20.0;
  wall.height = 5.0;
  const HeightField field(TerrainKind::Ridges, {wall});
  CameraModel cam;
  cam.tilt_deg = 20.0;
  const BasePose pose = level_pose(10, 10, 0.9);
  const DepthImage img = render_depth(field, pose, cam, 64, 48);
  const CameraFrame f = camera_frame(pose, cam);
  int wall_pixels = 0;
  for (int j = 0; j < img.height(); ++j) {
    for (int i = 0; i < img.width(); ++i) {
      const Eigen::Vector3d d = pixel_ray(f, cam, i + 0.5, j + 0.5, img.width(), img.height());
      const double t_wall = (11.5 - f.origin.x()) / d.x();
      const double z_wall = f.origin.z() + t_wall * d.z();
      const double t_ground = d.z() < 0.0 ? f.origin.z() / -d.z() : 1e300;
      double expected = t_ground;
      if (z_wall >= 0.0 && z_wall <= 5.0 && t_wall < t_ground) {
        expected = t_wall;
        ++wall_pixels;
      }
      ASSERT_TRUE(img.valid(i, j));
      EXPECT_NEAR(img.at(i, j), expected, 1e-5) << i << "," << j;
    }
  }
  EXPECT_GT(wall_pixels, 1000);
}

TEST(RenderDepth, SkyPixelsAreInvalid) {
  const HeightField field;
  CameraModel cam;
  cam.tilt_deg = 5.0;
  const DepthImage img = render_depth(field, level_pose(10, 10, 0.9), cam, 64, 48);
  EXPECT_FALSE(img.valid(32, 0));
  EXPECT_TRUE(img.valid(32, 47));
}

TEST(RenderDepth, CameraInsideTerrainIsFlagged) {
  TerrainFeature block;
  block.shape = FeatureShape::Block;
  block.x = 9.5;
  block.y = 9.5;
  block.length = 1.0;
  block.width = 1.0;
  block.height = 2.0;
  const HeightField field(TerrainKind::Blocks, {block});
  const DepthImage img = render_depth(field, level_pose(10, 10, 0.9), CameraModel{});
  EXPECT_TRUE(img.camera_inside_terrain);
  EXPECT_TRUE(img.fully_invalid());
  const DepthImage post = postprocess(img, CameraModel{});
  EXPECT_TRUE(post.camera_inside_terrain);
  EXPECT_TRUE(post.fully_invalid());
}

TEST(RenderDepth, MatchesCastRayPerPixel) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const oracle::Scene s = oracle::random_scene(seed);
    const DepthImage img = render_depth(s.field, s.pose, s.camera, 106, 60);
    const CameraFrame f = camera_frame(s.pose, s.camera);
    for (int j = 0; j < img.height(); ++j) {
      for (int i = 0; i < img.width(); ++i) {
        const Eigen::Vector3d d = pixel_ray(f, s.camera, i + 0.5, j + 0.5, img.width(), img.height());
        const double t = cast_ray(s.field, f.origin, d);
        ASSERT_EQ(img.valid(i, j), t != kNoHit) << seed;
        if (t != kNoHit) {
          EXPECT_NEAR(img.at(i, j), t, 1e-6) << seed;
        }
      }
    }
  }
}

TEST(RenderDepth, AgreesWithMillimeterMarchOracle) {
  for (std::uint64_t seed = 100; seed < 106; ++seed) {
    const oracle::Scene s = oracle::random_scene(seed);
    const DepthImage img = render_depth(s.field, s.pose, s.camera, 212, 120);
    const oracle::PixelCheck check = oracle::compare_with_march(s.field, s.pose, s.camera, img);
    EXPECT_EQ(check.failures, 0) << "seed " << seed;
    EXPECT_LE(check.max_error, 2e-3);
    EXPECT_GT(check.agree, check.pixels * 99 / 100);
  }
}

TEST(RenderDepth, OccludedBlockIsHidden) {
  // Low block behind a tall one: the camera must see the tall front face.
  TerrainFeature front;
  front.shape = FeatureShape::Block;
  front.x = 11.0;
  front.y = 9.0;
  front.length = 0.5;
  front.width = 2.0;
  front.height = 1.5;
  TerrainFeature back = front;
  back.x = 12.0;
  back.height = 0.3;
  const HeightField field(TerrainKind::Blocks, {front, back});
  CameraModel cam;
  cam.tilt_deg = 30.0;
  const BasePose pose = level_pose(10, 10, 0.9);
  const DepthImage img = render_depth(field, pose, cam, 128, 72);
  const oracle::PixelCheck check = oracle::compare_with_march(field, pose, cam, img);
  EXPECT_EQ(check.failures, 0);
}

TEST(RenderDepth, MonotoneUnderTerrainRaising) {
  // Raising all terrain by delta is lowering the camera by delta.
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const oracle::Scene s = oracle::random_scene(seed);
    BasePose lowered = s.pose;
    lowered.position.z() -= 0.05;
    const DepthImage a = render_depth(s.field, s.pose, s.camera, 106, 60);
    const DepthImage b = render_depth(s.field, lowered, s.camera, 106, 60);
    if (b.camera_inside_terrain) {
      continue;
    }
    for (int j = 0; j < a.height(); ++j) {
      for (int i = 0; i < a.width(); ++i) {
        if (a.valid(i, j)) {
          ASSERT_TRUE(b.valid(i, j));
          EXPECT_LE(b.at(i, j), a.at(i, j) + 1e-6);
        }
      }
    }
  }
}

TEST(RenderDepth, Deterministic) {
  const oracle::Scene s = oracle::random_scene(3);
  EXPECT_EQ(render_depth(s.field, s.pose, s.camera), render_depth(s.field, s.pose, s.camera));
}

TEST(RenderDepth, RawResolution) {
  const oracle::Scene s = oracle::random_scene(4);
  const DepthImage raw = render_depth(s.field, s.pose, s.camera);
  EXPECT_EQ(raw.width(), 848);
  EXPECT_EQ(raw.height(), 480);
  const DepthImage out = postprocess(raw, s.camera);
  EXPECT_EQ(out.width(), 128);
  EXPECT_EQ(out.height(), 128);
  for (int j = 0; j < 128; ++j) {
    for (int i = 0; i < 128; ++i) {
      ASSERT_TRUE(out.valid(i, j));
      ASSERT_GE(out.at(i, j), static_cast<float>(s.camera.clip_min));
      ASSERT_LE(out.at(i, j), static_cast<float>(s.camera.clip_max));
    }
  }
}

TEST(Postprocess, ConstantImageStaysConstant) {
  const DepthImage raw(848, 480, 1.25f);
  const DepthImage out = postprocess(raw, CameraModel{});
  ASSERT_EQ(out.width(), 128);
  for (float v : out.depth()) {
    EXPECT_FLOAT_EQ(v, 1.25f);
  }
}

TEST(Postprocess, SingleHoleTakesNeighborValue) {
  DepthImage img(9, 9, 0.8f);
  img.set_valid(4, 4, false);
  img.at(4, 4) = 0.0f;
  const DepthImage filled = fill_holes(img);
  EXPECT_TRUE(filled.valid(4, 4));
  EXPECT_EQ(filled.at(4, 4), 0.8f);
}

TEST(Postprocess, LargeHoleIsFilledCompletely) {
  DepthImage img(40, 30, 2.0f);
  for (int y = 5; y < 25; ++y) {
    for (int x = 0; x < 30; ++x) {
      img.set_valid(x, y, false);
    }
  }
  const DepthImage filled = fill_holes(img);
  EXPECT_EQ(filled.valid_count(), filled.size());
  for (float v : filled.depth()) {
    EXPECT_FLOAT_EQ(v, 2.0f);
  }
}

TEST(Postprocess, ClampsToClipRange) {
  DepthImage raw(848, 480, 7.0f);
  raw.at(0, 0) = 0.01f;
  const DepthImage out = postprocess(raw, CameraModel{});
  EXPECT_EQ(out.at(60, 60), 3.0f);
  EXPECT_GE(out.at(0, 0), 0.15f);
}

TEST(Postprocess, IdempotentOnCleanOutputImage) {
  const oracle::Scene s = oracle::random_scene(9);
  const DepthImage once = postprocess(render_depth(s.field, s.pose, s.camera), s.camera);
  EXPECT_EQ(postprocess(once, s.camera), once);
}

TEST(ResizeArea, PreservesMeanOfIntegerFactor) {
  DepthImage img(8, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 8; ++x) {
      img.at(x, y) = static_cast<float>(x + 10 * y);
    }
  }
  const DepthImage out = resize_area(img, 4, 2);
  EXPECT_FLOAT_EQ(out.at(0, 0), (0 + 1 + 10 + 11) / 4.0f);
  EXPECT_FLOAT_EQ(out.at(3, 1), (26 + 27 + 36 + 37) / 4.0f);
}

TEST(Footprint, NominalCameraAtOneMeter) {
  CameraModel cam;
  cam.mount_offset = Eigen::Vector3d::Zero();
  const GroundFootprint fp = footprint_check(cam, level_pose(10, 10, 1.0));
  // Top row at 60 - 29 = 31 degrees, bottom row at 89 degrees.
  EXPECT_NEAR(fp.forward_max, 1.0 / std::tan(rad(31.0)), 1e-9);
  EXPECT_NEAR(fp.forward_min, 1.0 / std::tan(rad(89.0)), 1e-9);
  // Covers the 1.5 m heightmap window ahead of the base.
  EXPECT_GE(fp.forward_max, 1.5);
  EXPECT_LE(fp.forward_min, 0.05);
}

TEST(Footprint, StraightDownIsCentered) {
  CameraModel cam;
  cam.mount_offset = Eigen::Vector3d::Zero();
  cam.tilt_deg = 89.999999;
  const GroundFootprint fp = footprint_check(cam, level_pose(10, 10, 1.0, 0.3));
  EXPECT_NEAR(fp.forward_min, -fp.forward_max, 1e-6);
  EXPECT_NEAR(fp.lateral_min, -fp.lateral_max, 1e-9);
}

TEST(Footprint, DoublingHeightScalesExtents) {
  CameraModel cam;
  cam.mount_offset = Eigen::Vector3d::Zero();
  const GroundFootprint a = footprint_check(cam, level_pose(10, 10, 1.0));
  const GroundFootprint b = footprint_check(cam, level_pose(10, 10, 2.0));
  EXPECT_NEAR(b.forward_coverage(), 2.0 * a.forward_coverage(), 1e-9);
  EXPECT_NEAR(b.lateral_coverage(), 2.0 * a.lateral_coverage(), 1e-9);
}

}  // namespace
}  // namespace terrasight
