#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

#include "terrasight/gait.hpp"
#include "terrasight/local_heightmap.hpp"
#include "terrasight/reward.hpp"
#include "terrasight/terrain.hpp"

namespace terrasight {

/// Parameters of the scripted kinematic biped.
struct WalkerConfig {
  double nominal_height = 0.9;
  double height_time_constant = 0.3;
  double bob_amplitude = 0.02;
  double swing_clearance = 0.15;
  /// Lateral foot offset from the base centerline.
  double stance_half_width = 0.135;
  /// Distance from foot center to toe (and heel).
  double foot_half_length = 0.08;
  /// Extra flat ground required beyond toe and heel when snapping.
  double foothold_margin = 0.02;
  /// Largest shift along the heading when snapping a foothold.
  double foothold_search = 0.2;
  /// Height spread below which the ground under a foot counts as flat.
  double flat_tolerance = 0.01;
  /// Body collision when terrain within this half-size square around the
  /// base rises above base z - body_clearance.
  double pelvis_half_size = 0.15;
  double body_clearance = 0.35;
  GaitConfig gait;
};

/// Robot state recorded per step. Feet are stored in the world frame;
/// feet_local() expresses them in the yaw-aligned base frame.
struct RobotState {
  BasePose pose;
  std::array<Eigen::Vector3d, 2> feet_world{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  ClockState clock;
  std::int64_t timestamp_ms = 0;

  std::array<Eigen::Vector3d, 2> feet_local() const;

  bool operator==(const RobotState&) const = default;
};

/// Swing plan of one leg.
struct SwingPlan {
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  double apex = 0.0;
};

/// Full walker state owned by one episode.
struct WalkerState {
  RobotState robot;
  /// Low-passed base height before the bob is added.
  double filtered_height = 0.0;
  std::array<bool, 2> swinging{false, false};
  std::array<SwingPlan, 2> plans;
  std::array<Eigen::Vector3d, 2> previous_feet{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  std::array<Eigen::Vector3d, 2> foot_accel{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  /// Events of the last step.
  std::array<bool, 2> forefoot_touch{false, false};
  bool body_contact = false;
};

/// Standing start: base at nominal height over (x, y), feet under the hips.
WalkerState spawn_walker(const HeightField& field, double x, double y, double yaw, const WalkerConfig& config = {});

/// Position along a swing arc at s in [0, 1]: cycloidal progress
/// horizontally, a sine bump through `apex` vertically.
Eigen::Vector3d swing_point(const SwingPlan& plan, double s);

/// Snaps a foothold along `heading` to the nearest offset where the whole foot
/// (plus margin) rests on flat ground; z is set to the ground height.
Eigen::Vector3d snap_foothold(const HeightField& field, const Eigen::Vector2d& target, const Eigen::Vector2d& heading,
                              const WalkerConfig& config = {});

/// Advances the walker by one 20 ms control step under `command`.
void surrogate_step(WalkerState& state, const Command& command, const HeightField& field,
                    const WalkerConfig& config = {});

/// Max terrain height over the pelvis footprint.
double pelvis_terrain_height(const HeightField& field, const BasePose& pose, const WalkerConfig& config = {});

}  // namespace terrasight
