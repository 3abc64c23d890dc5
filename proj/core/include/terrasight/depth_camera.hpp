#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "terrasight/local_heightmap.hpp"
#include "terrasight/terrain.hpp"

namespace terrasight {

/// Egocentric depth camera rigidly mounted on the floating base.
struct CameraModel {
  /// Mount position in the base frame.
  Eigen::Vector3d mount_offset{0.0, 0.0, 0.05};
  /// Pitch of the optical axis below the base's horizontal plane.
  double tilt_deg = 60.0;
  double hfov_deg = 87.0;
  double vfov_deg = 58.0;
  int raw_width = 848;
  int raw_height = 480;
  int out_width = 128;
  int out_height = 128;
  double clip_min = 0.15;
  double clip_max = 3.0;

  /// Throws ConfigError when a field is out of its valid range.
  void validate() const;

  bool operator==(const CameraModel&) const = default;
};

/// Camera origin and orthonormal axes (forward, image right, image down) in
/// the world frame.
struct CameraFrame {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d forward = Eigen::Vector3d::UnitX();
  Eigen::Vector3d right = -Eigen::Vector3d::UnitY();
  Eigen::Vector3d down = -Eigen::Vector3d::UnitZ();
};

CameraFrame camera_frame(const BasePose& pose, const CameraModel& camera);

/// Unit ray through continuous image coordinates (u, v) of a `width` x
/// `height` image; pixel (i, j) has its center at (i + 0.5, j + 0.5).
Eigen::Vector3d pixel_ray(const CameraFrame& frame, const CameraModel& camera, double u, double v, int width,
                          int height);

/// Metric depth image, row-major. Invalid pixels (no surface hit, holes)
/// carry a zero mask entry; their stored value is meaningless.
class DepthImage {
 public:
  DepthImage() = default;
  DepthImage(int width, int height, float fill = 0.0f, bool valid = true);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return depth_.size(); }

  float& at(int x, int y) { return depth_[index(x, y)]; }
  float at(int x, int y) const { return depth_[index(x, y)]; }
  bool valid(int x, int y) const { return valid_[index(x, y)] != 0; }
  void set_valid(int x, int y, bool v) { valid_[index(x, y)] = v ? 1 : 0; }

  std::span<float> depth() noexcept { return depth_; }
  std::span<const float> depth() const noexcept { return depth_; }
  std::span<std::uint8_t> mask() noexcept { return valid_; }
  std::span<const std::uint8_t> mask() const noexcept { return valid_; }

  std::size_t valid_count() const noexcept;
  bool fully_invalid() const noexcept { return valid_count() == 0; }

  /// Set when the camera origin lies inside the terrain.
  bool camera_inside_terrain = false;

  bool operator==(const DepthImage&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> depth_;
  std::vector<std::uint8_t> valid_;
};

inline constexpr double kNoHit = std::numeric_limits<double>::infinity();

/// Distance along the unit ray `direction` from `origin` to the first
/// terrain intersection, or kNoHit within `max_distance`. Flat-topped prisms
/// are intersected exactly (tops and vertical faces); the smooth hill
/// component is solved by safeguarded Newton iteration to 1e-10 m.
/// `guess` optionally warm-starts the hill solver.
double cast_ray(const HeightField& field, const Eigen::Vector3d& origin, const Eigen::Vector3d& direction,
                double max_distance = 100.0, double guess = -1.0);

/// Raw depth rendering at the camera's raw resolution. Each pixel holds the
/// distance along its ray to the first terrain hit; rays that miss are
/// invalid. If the camera is inside the terrain every pixel is invalid and
/// camera_inside_terrain is set.
DepthImage render_depth(const HeightField& field, const BasePose& pose, const CameraModel& camera);

/// Renders at an arbitrary resolution (same optics).
DepthImage render_depth(const HeightField& field, const BasePose& pose, const CameraModel& camera, int width,
                        int height);

/// Fills invalid pixels by repeated averaging of valid 4-neighbors until no
/// reachable hole remains. A fully invalid image is returned unchanged.
DepthImage fill_holes(const DepthImage& image);

/// Area-weighted resampling to width x height; invalid inputs must be filled
/// first.
DepthImage resize_area(const DepthImage& image, int width, int height);

/// Hardware-style post-processing: hole filling, clipping to the camera's
/// range, then area resize to the output resolution. A fully invalid input
/// yields a fully invalid output.
DepthImage postprocess(const DepthImage& raw, const CameraModel& camera);

/// Ground footprint of the image frustum on the plane under the base,
/// expressed in the yaw-aligned base frame (x forward, y left).
struct GroundFootprint {
  /// Ground points of the image corners: top-left, top-right, bottom-right,
  /// bottom-left. Infinite when the corner ray does not reach the ground.
  std::array<Eigen::Vector2d, 4> corners;
  double forward_min = 0.0;
  double forward_max = 0.0;
  double lateral_min = 0.0;
  double lateral_max = 0.0;

  double forward_coverage() const { return forward_max - forward_min; }
  double lateral_coverage() const { return lateral_max - lateral_min; }
};

/// Projects the frustum onto flat ground at height `ground_z` (world).
GroundFootprint footprint_check(const CameraModel& camera, const BasePose& pose, double ground_z = 0.0);

}  // namespace terrasight
