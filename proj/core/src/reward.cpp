#include "terrasight/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace terrasight {

double reward_accel(const Eigen::Vector3d& accel_left, const Eigen::Vector3d& accel_right) {
  return kAccelRewardScale * std::exp(-kAccelRewardRate * (accel_left.norm() + accel_right.norm()));
}

double reward_collision(bool forefoot_touch) { return forefoot_touch ? kCollisionPenalty : 0.0; }

bool in_stance(const ClockState& clock, int leg) {
  const double shift = leg == 0 ? clock.shift_left : clock.shift_right;
  return wrap_unit(clock.phase + shift) < 0.5;
}

double base_reward(const ClockState& clock, const std::array<LegContact, 2>& legs, const BaseRewardConfig& config) {
  double sum = 0.0;
  for (int leg = 0; leg < 2; ++leg) {
    if (in_stance(clock, leg)) {
      sum += legs[leg].in_contact ? 1.0 : 0.0;
    } else {
      sum += std::clamp(legs[leg].clearance / config.target_clearance, 0.0, 1.0);
    }
  }
  return 0.5 * sum;
}

RewardBreakdown combine_rewards(double r0, double r_accel, double r_collision) {
  return {r0, r_accel, r_collision, r0 + r_accel + r_collision};
}

bool forefoot_collision_check(const HeightField& field, const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  const Eigen::Vector2d a = from.head<2>();
  const Eigen::Vector2d delta = to.head<2>() - a;
  const double length = delta.norm();
  if (length == 0.0) {
    return false;
  }
  // Parameters where the path crosses a prism boundary.
  std::vector<double> crossings;
  for (const Prism& p : field.prisms()) {
    const double xs[2] = {p.x0, p.x1};
    const double ys[2] = {p.y0, p.y1};
    if (delta.x() != 0.0) {
      for (double x : xs) {
        const double s = (x - a.x()) / delta.x();
        const double y = a.y() + s * delta.y();
        if (s >= 0.0 && s <= 1.0 && y >= p.y0 && y <= p.y1) {
          crossings.push_back(s);
        }
      }
    }
    if (delta.y() != 0.0) {
      for (double y : ys) {
        const double s = (y - a.y()) / delta.y();
        const double x = a.x() + s * delta.x();
        if (s >= 0.0 && s <= 1.0 && x >= p.x0 && x <= p.x1) {
          crossings.push_back(s);
        }
      }
    }
  }
  std::sort(crossings.begin(), crossings.end());
  crossings.erase(std::unique(crossings.begin(), crossings.end()), crossings.end());
  const Eigen::Vector2d unit = delta / length;
  constexpr double kSide = 1e-9;
  for (double s : crossings) {
    const Eigen::Vector2d p = a + s * delta;
    const double before = field.surface_height(p.x() - kSide * unit.x(), p.y() - kSide * unit.y());
    const double after = field.surface_height(p.x() + kSide * unit.x(), p.y() + kSide * unit.y());
    const double z = from.z() + s * (to.z() - from.z());
    if (after > before && z < after) {
      return true;
    }
  }
  return false;
}

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::None: return "none";
    case TerminationReason::Tilt: return "tilt";
    case TerminationReason::Overspeed: return "overspeed";
    case TerminationReason::LowBase: return "low_base";
    case TerminationReason::BodyCollision: return "body_collision";
  }
  return "unknown";
}

std::optional<TerminationReason> parse_termination(std::string_view name) {
  for (auto reason : {TerminationReason::None, TerminationReason::Tilt, TerminationReason::Overspeed,
                      TerminationReason::LowBase, TerminationReason::BodyCollision}) {
    if (to_string(reason) == name) {
      return reason;
    }
  }
  return std::nullopt;
}

TerminationReason check_termination(const BasePose& pose, const Command& command, const HeightField& field,
                                    bool body_contact, const TerminationConfig& config) {
  const double max_tilt = config.max_tilt_deg * std::numbers::pi / 180.0;
  if (std::abs(pose.roll) > max_tilt || std::abs(pose.pitch) > max_tilt) {
    return TerminationReason::Tilt;
  }
  const double commanded = std::sqrt(command.vx * command.vx + command.vy * command.vy);
  if (pose.linear_velocity.norm() > config.overspeed_margin + commanded) {
    return TerminationReason::Overspeed;
  }
  if (pose.position.z() - field.height_at(pose.position.x(), pose.position.y()) < config.min_base_height) {
    return TerminationReason::LowBase;
  }
  if (body_contact) {
    return TerminationReason::BodyCollision;
  }
  return TerminationReason::None;
}

}  // namespace terrasight
