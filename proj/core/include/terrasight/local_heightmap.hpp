#pragma once

#include <array>
#include <cstdint>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "terrasight/gait.hpp"
#include "terrasight/rng.hpp"
#include "terrasight/terrain.hpp"

namespace terrasight {

/// Floating-base state in the world frame. Orientation is stored as
/// yaw/pitch/roll (applied in that order, z-y-x) with yaw in (-pi, pi].
struct BasePose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  Eigen::Vector3d linear_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();

  Eigen::Matrix3d rotation() const;
  Eigen::Quaterniond quaternion() const;
  /// Unit forward vector of the gravity-aligned yaw frame.
  Eigen::Vector2d heading() const { return {std::cos(yaw), std::sin(yaw)}; }

  bool operator==(const BasePose&) const = default;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

/// Placement of the heightmap window in the yaw-aligned base frame.
struct HeightmapWindow {
  /// Forward coordinate of the near edge of the window.
  double forward_offset = 0.0;
};

/// Heights relative to the base over the 1.5 m x 1 m window ahead of the
/// robot at 5 cm resolution. Row i covers forward coordinate
/// forward_offset + (i + 0.5) * 0.05, column j covers lateral coordinate
/// 0.5 - (j + 0.5) * 0.05 (column 0 is on the left). Storage is row-major.
class LocalHeightmap {
 public:
  static constexpr int kRows = 30;
  static constexpr int kCols = 20;
  static constexpr int kSize = kRows * kCols;
  static constexpr double kResolution = 0.05;

  LocalHeightmap() { values_.fill(0.0); }

  double& at(int row, int col) { return values_[static_cast<std::size_t>(row) * kCols + col]; }
  double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * kCols + col]; }
  std::span<double, kSize> values() { return values_; }
  std::span<const double, kSize> values() const { return values_; }

  static double forward_coordinate(int row, const HeightmapWindow& window = {}) {
    return window.forward_offset + (row + 0.5) * kResolution;
  }
  static double lateral_coordinate(int col) { return 0.5 - (col + 0.5) * kResolution; }

  bool operator==(const LocalHeightmap&) const = default;

 private:
  std::array<double, kSize> values_;
};

/// Cell (row, col) is the terrain height at the cell center, transformed by
/// the base yaw and position, minus the base height. Roll and pitch do not
/// rotate the window. Throws OutOfMapError if the window leaves the map.
LocalHeightmap extract_heightmap(const HeightField& field, const BasePose& pose,
                                 const HeightmapWindow& window = {});

/// World XY of a heightmap cell center.
Eigen::Vector2d heightmap_cell_world(const BasePose& pose, int row, int col,
                                     const HeightmapWindow& window = {});

struct HeightmapNoiseBounds {
  double episode_xy = 0.05;
  double step_xy = 0.05;
  double episode_z = 0.1;
  double step_z = 0.02;
  Interval delay_ms{20.0, 100.0};
};

struct HeightmapShift {
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;

  bool operator==(const HeightmapShift&) const = default;
};

/// Per-episode heightmap randomization: fixed episode offsets, the bounds
/// of fresh per-step offsets, and the observation delay.
struct HeightmapNoiseState {
  HeightmapShift episode;
  double step_xy = 0.05;
  double step_z = 0.02;
  double delay_ms = 20.0;

  /// Draws one per-step offset.
  HeightmapShift sample_step(Rng& rng) const;

  bool operator==(const HeightmapNoiseState&) const = default;
};

HeightmapNoiseState sample_heightmap_noise(Rng& rng, const HeightmapNoiseBounds& bounds = {});

/// Resamples the map at (episode + per-step) XY offsets, nearest cell with
/// edge replication, and adds the (episode + per-step) Z offset.
LocalHeightmap apply_randomization(const LocalHeightmap& heightmap, const HeightmapNoiseState& noise, Rng& rng);

/// Applies a fixed total shift.
LocalHeightmap apply_shift(const LocalHeightmap& heightmap, const HeightmapShift& shift);

struct TimedHeightmap {
  std::int64_t timestamp_ms = 0;
  LocalHeightmap heightmap;
};

/// Latest entry with timestamp <= now - delay; the oldest entry when the
/// history does not reach back far enough. `history` is ordered by time.
const LocalHeightmap& delayed_view(std::span<const TimedHeightmap> history, double now_ms, double delay_ms);

/// Bounded time-ordered history owned by one episode.
class HeightmapHistory {
 public:
  explicit HeightmapHistory(std::size_t capacity = 8) : capacity_(capacity) {}

  void push(std::int64_t timestamp_ms, const LocalHeightmap& heightmap);
  const LocalHeightmap& delayed(double now_ms, double delay_ms) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::size_t capacity_;
  std::vector<TimedHeightmap> entries_;
};

/// Foot-centered scan used by a privileged critic: an 11 x 11 grid at 5 cm
/// spacing in the yaw frame (row = forward, col = left to right), heights
/// relative to the base, plus the downward rangefinder distance.
struct FootScan {
  static constexpr int kSide = 11;
  std::array<double, kSide * kSide> heights{};
  double rangefinder = 0.0;
};

/// One scan per foot. Samples off the map replicate the map edge.
std::vector<FootScan> extract_privileged(const HeightField& field, const BasePose& pose,
                                         std::span<const Eigen::Vector3d> feet_world);

struct MirroredObservation {
  LocalHeightmap heightmap;
  Command command;
  ClockState clock;
};

/// Reflection about the sagittal plane: the lateral axis of the heightmap is
/// reversed, lateral velocity and yaw rate change sign, leg shifts swap.
MirroredObservation mirror_observation(const LocalHeightmap& heightmap, const Command& command,
                                       const ClockState& clock);

}  // namespace terrasight
