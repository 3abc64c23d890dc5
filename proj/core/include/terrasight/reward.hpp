#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <optional>

#include <Eigen/Core>

#include "terrasight/gait.hpp"
#include "terrasight/local_heightmap.hpp"
#include "terrasight/terrain.hpp"

namespace terrasight {

inline constexpr double kAccelRewardScale = 0.05;
inline constexpr double kAccelRewardRate = 0.02;
inline constexpr double kCollisionPenalty = -5.0;

/// 0.05 * exp(-0.02 * (|a_left| + |a_right|)).
double reward_accel(const Eigen::Vector3d& accel_left, const Eigen::Vector3d& accel_right);

/// -5 on a forefoot touch, else 0.
double reward_collision(bool forefoot_touch);

/// Inputs of the clock-aligned base reward for one leg.
struct LegContact {
  bool in_contact = false;
  /// Foot height above the terrain beneath it.
  double clearance = 0.0;
};

struct BaseRewardConfig {
  /// Swing clearance that earns the full swing term.
  double target_clearance = 0.15;
};

/// Clock-aligned contact reward in [0, 1]: a leg in its stance half-cycle
/// earns 1 when in contact, a leg in swing earns min(clearance / target, 1);
/// the two legs are averaged.
double base_reward(const ClockState& clock, const std::array<LegContact, 2>& legs,
                   const BaseRewardConfig& config = {});

/// True when leg `leg` (0 left, 1 right) is in its stance half-cycle.
bool in_stance(const ClockState& clock, int leg);

struct RewardBreakdown {
  double r0 = 0.0;
  double r_accel = 0.0;
  double r_collision = 0.0;
  double total = 0.0;

  bool operator==(const RewardBreakdown&) const = default;
};

/// All components weighted equally.
RewardBreakdown combine_rewards(double r0, double r_accel, double r_collision);

/// True iff the forefoot point moving from `from` to `to` runs into a vertical
/// terrain face: at some crossing the ground rises and the point is strictly
/// below the new plateau. Landing exactly at plateau height is not a touch.
bool forefoot_collision_check(const HeightField& field, const Eigen::Vector3d& from, const Eigen::Vector3d& to);

enum class TerminationReason : std::uint8_t { None = 0, Tilt, Overspeed, LowBase, BodyCollision };
std::string_view to_string(TerminationReason reason);
std::optional<TerminationReason> parse_termination(std::string_view name);

struct TerminationConfig {
  double max_tilt_deg = 15.0;
  /// Overspeed when |v| > margin + |(vx, vy)| of the command.
  double overspeed_margin = 1.0;
  double min_base_height = 0.40;
};

/// Single reason with priority Tilt > Overspeed > LowBase > BodyCollision.
/// Base height is measured against the terrain directly beneath the base.
TerminationReason check_termination(const BasePose& pose, const Command& command, const HeightField& field,
                                    bool body_contact, const TerminationConfig& config = {});

}  // namespace terrasight
