#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "terrasight/depth_noise.hpp"
#include "terrasight/errors.hpp"

namespace terrasight {
namespace {

DepthImage clean_frame(std::uint64_t seed) {
  const oracle::Scene s = oracle::random_scene(seed);
  return postprocess(render_depth(s.field, s.pose, s.camera), s.camera);
}

NoiseConfig only(NoiseType type) {
  NoiseConfig c;
  c.probability.fill(0.0);
  c.probability[static_cast<std::size_t>(type)] = 1.0;
  return c;
}

TEST(CameraRandomization, ZeroBoundsIsIdentity) {
  Rng rng(1);
  const CameraModel cam;
  EXPECT_EQ(randomize_camera(cam, rng, {0.0, 0.0, 0.0}), cam);
}

TEST(CameraRandomization, PitchUniformWithinOneDegree) {
  Rng rng(2);
  double sum = 0.0;
  double lo = 1.0;
  double hi = -1.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const CameraRandomization r = sample_camera_randomization(rng);
    ASSERT_LE(std::abs(r.pitch_shift_deg), 1.0);
    ASSERT_LE(std::abs(r.fov_shift_deg), 1.0);
    for (int k = 0; k < 3; ++k) {
      ASSERT_LE(std::abs(r.position_shift[k]), 0.01);
    }
    sum += r.pitch_shift_deg;
    lo = std::min(lo, r.pitch_shift_deg);
    hi = std::max(hi, r.pitch_shift_deg);
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_LT(lo, -0.99);
  EXPECT_GT(hi, 0.99);
}

TEST(CameraRandomization, AppliesShiftToPoseAndBothFovs) {
  CameraRandomization shift;
  shift.position_shift = {0.01, -0.005, 0.002};
  shift.pitch_shift_deg = -0.5;
  shift.fov_shift_deg = 0.75;
  const CameraModel cam;
  const CameraModel out = apply_camera_randomization(cam, shift);
  EXPECT_EQ(out.mount_offset, cam.mount_offset + shift.position_shift);
  EXPECT_EQ(out.tilt_deg, 59.5);
  EXPECT_EQ(out.hfov_deg, 87.75);
  EXPECT_EQ(out.vfov_deg, 58.75);
}

TEST(CameraRandomization, SameSeedSameCamera) {
  Rng a(9);
  Rng b(9);
  EXPECT_EQ(randomize_camera(CameraModel{}, a), randomize_camera(CameraModel{}, b));
}

TEST(Augment, AllProbabilitiesZeroIsIdentity) {
  const DepthImage img = clean_frame(1);
  NoiseConfig c;
  c.probability.fill(0.0);
  Rng rng(3);
  const AugmentResult r = augment(img, c, rng, 0.15, 3.0);
  EXPECT_EQ(r.image, img);
  for (bool b : r.applied) {
    EXPECT_FALSE(b);
  }
}

TEST(Augment, GaussianWithZeroSigmaIsIdentity) {
  const DepthImage img = clean_frame(2);
  NoiseConfig c = only(NoiseType::Gaussian);
  c.gaussian_sigma_ratio = 0.0;
  Rng rng(4);
  EXPECT_EQ(augment(img, c, rng, 0.15, 3.0).image, img);
}

TEST(Augment, ApplicationRatesNearConfiguredProbability) {
  const DepthImage img(128, 128, 1.0f);
  const NoiseConfig c;
  Rng rng(5);
  std::array<int, 5> hits{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    // The decision draws come first; a tiny image keeps this fast.
    const DepthImage small(8, 8, 1.0f);
    const AugmentResult r = augment(small, c, rng, 0.15, 3.0);
    for (int k = 0; k < 5; ++k) {
      hits[k] += r.applied[k];
    }
  }
  for (int k = 0; k < 5; ++k) {
    const double rate = hits[k] / static_cast<double>(n);
    EXPECT_GE(rate, 0.27) << k;
    EXPECT_LE(rate, 0.33) << k;
  }
}

TEST(Augment, OutputStaysFiniteValidAndClipped) {
  NoiseConfig c;
  c.probability.fill(1.0);
  Rng rng(6);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DepthImage img = clean_frame(seed);
    const AugmentResult r = augment(img, c, rng, 0.15, 3.0);
    EXPECT_EQ(r.image.valid_count(), r.image.size());
    for (float v : r.image.depth()) {
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, 0.15f);
      ASSERT_LE(v, 3.0f);
    }
  }
}

TEST(Augment, FixedSeedIsDeterministic) {
  const DepthImage img = clean_frame(7);
  NoiseConfig c;
  c.probability.fill(1.0);
  Rng a(8);
  Rng b(8);
  EXPECT_EQ(augment(img, c, a, 0.15, 3.0).image, augment(img, c, b, 0.15, 3.0).image);
}

TEST(NoiseStages, RotationByZeroIsIdentity) {
  const DepthImage img = clean_frame(3);
  EXPECT_EQ(rotate_image(img, 0.0), img);
}

TEST(NoiseStages, RotationKeepsConstantImage) {
  const DepthImage img(64, 64, 1.5f);
  const DepthImage out = rotate_image(img, 2.5);
  for (float v : out.depth()) {
    EXPECT_FLOAT_EQ(v, 1.5f);
  }
}

TEST(NoiseStages, EdgeNoiseTouchesOnlyDiscontinuities) {
  DepthImage img(32, 32, 1.0f);
  for (int y = 0; y < 32; ++y) {
    for (int x = 16; x < 32; ++x) {
      img.at(x, y) = 2.0f;
    }
  }
  const DepthImage out = edge_noise(img, 0.1, 2);
  EXPECT_EQ(out.at(5, 10), 1.0f);
  EXPECT_EQ(out.at(25, 10), 2.0f);
  EXPECT_EQ(out.valid_count(), out.size());
  // Pixels next to the step were re-filled from outside the dilated band.
  EXPECT_GT(out.at(16, 10), 1.0f);
  EXPECT_LT(out.at(15, 10), 2.0f);
  // Smooth images pass through untouched.
  const DepthImage flat(32, 32, 1.0f);
  EXPECT_EQ(edge_noise(flat, 0.1, 2), flat);
}

TEST(NoiseStages, ObjectsAreNearerThanTheScene) {
  const DepthImage img(64, 64, 2.0f);
  Rng rng(10);
  const NoiseConfig c;
  const DepthImage out = add_objects(img, c, rng, 0.15);
  int changed = 0;
  for (float v : out.depth()) {
    EXPECT_LE(v, 2.0f);
    EXPECT_GE(v, 0.15f);
    changed += v != 2.0f;
  }
  EXPECT_GT(changed, 0);
}

TEST(NoiseStages, SpotsAreFilledBack) {
  const DepthImage img = clean_frame(5);
  Rng rng(11);
  const DepthImage out = spot_noise(img, NoiseConfig{}, rng);
  EXPECT_EQ(out.valid_count(), out.size());
}

TEST(NoiseConfig, ValidateRejectsBadProbability) {
  NoiseConfig c;
  c.probability[2] = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.object_count = {3, 1};
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace terrasight
