#include "terrasight/walker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace terrasight {

namespace {

Eigen::Vector2d rotate(double yaw, const Eigen::Vector2d& v) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// One planar base update; shared by the step and the touchdown predictor.
void integrate_planar(Eigen::Vector2d& xy, double& yaw, const Command& command) {
  xy += rotate(yaw, {command.vx, command.vy}) * kControlPeriodS;
  yaw = wrap_angle(yaw + deg2rad(command.yaw_rate_deg) * kControlPeriodS);
}

}  // namespace

std::array<Eigen::Vector3d, 2> RobotState::feet_local() const {
  std::array<Eigen::Vector3d, 2> out;
  for (int leg = 0; leg < 2; ++leg) {
    const Eigen::Vector3d rel = feet_world[leg] - pose.position;
    const Eigen::Vector2d xy = rotate(-pose.yaw, rel.head<2>());
    out[leg] = {xy.x(), xy.y(), rel.z()};
  }
  return out;
}

Eigen::Vector3d snap_foothold(const HeightField& field, const Eigen::Vector2d& target, const Eigen::Vector2d& heading,
                              const WalkerConfig& config) {
  const double reach = config.foot_half_length + config.foothold_margin;
  const int steps = static_cast<int>(std::lround(config.foothold_search / 0.01));
  for (int k = 0; k <= 2 * steps; ++k) {
    // 0, +1, -1, +2, -2, ... centimeters.
    const int n = (k + 1) / 2;
    const double offset = (k % 2 == 1 ? 1.0 : -1.0) * n * 0.01;
    const Eigen::Vector2d center = target + offset * heading;
    const Eigen::Vector2d heel = center - reach * heading;
    const Eigen::Vector2d toe = center + reach * heading;
    if (!HeightField::contains(heel.x(), heel.y()) || !HeightField::contains(toe.x(), toe.y())) {
      continue;
    }
    const double h_center = field.height_at(center.x(), center.y());
    const double low = std::min({field.height_at(heel.x(), heel.y()), h_center, field.height_at(toe.x(), toe.y())});
    if (field.max_height_along(heel, toe) - low <= config.flat_tolerance) {
      return {center.x(), center.y(), h_center};
    }
  }
  return {target.x(), target.y(), field.height_at(target.x(), target.y())};
}

Eigen::Vector3d swing_point(const SwingPlan& plan, double s) {
  const double progress = s - std::sin(2.0 * std::numbers::pi * s) / (2.0 * std::numbers::pi);
  const Eigen::Vector2d xy = plan.start.head<2>() + (plan.target.head<2>() - plan.start.head<2>()) * progress;
  const double base = plan.start.z() + (plan.target.z() - plan.start.z()) * progress;
  const double z = base + (plan.apex - base) * std::sin(std::numbers::pi * s);
  return {xy.x(), xy.y(), z};
}

double pelvis_terrain_height(const HeightField& field, const BasePose& pose, const WalkerConfig& config) {
  const int n = 3;
  double best = -1e300;
  for (int i = -n; i <= n; ++i) {
    for (int j = -n; j <= n; ++j) {
      const Eigen::Vector2d offset(config.pelvis_half_size * i / n, config.pelvis_half_size * j / n);
      const Eigen::Vector2d p = pose.position.head<2>() + rotate(pose.yaw, offset);
      best = std::max(best, field.height_at(p.x(), p.y()));
    }
  }
  return best;
}

WalkerState spawn_walker(const HeightField& field, double x, double y, double yaw, const WalkerConfig& config) {
  WalkerState state;
  RobotState& robot = state.robot;
  robot.pose.position = {x, y, field.height_at(x, y) + config.nominal_height};
  robot.pose.yaw = wrap_angle(yaw);
  state.filtered_height = robot.pose.position.z();
  robot.clock.increment = config.gait.nominal_increment;
  const Eigen::Vector2d heading(std::cos(robot.pose.yaw), std::sin(robot.pose.yaw));
  for (int leg = 0; leg < 2; ++leg) {
    const double side = leg == 0 ? 1.0 : -1.0;
    const Eigen::Vector2d hip = Eigen::Vector2d(x, y) + rotate(robot.pose.yaw, {0.0, side * config.stance_half_width});
    robot.feet_world[leg] = snap_foothold(field, hip, heading, config);
    state.previous_feet[leg] = robot.feet_world[leg];
  }
  return state;
}

void surrogate_step(WalkerState& state, const Command& command, const HeightField& field,
                    const WalkerConfig& config) {
  RobotState& robot = state.robot;
  BasePose& pose = robot.pose;
  const Eigen::Vector3d old_position = pose.position;
  const double dt = kControlPeriodS;

  robot.clock = advance(robot.clock, config.gait.nominal_increment, 0.0, 0.0);
  robot.timestamp_ms += static_cast<std::int64_t>(kControlPeriodMs);

  Eigen::Vector2d xy = pose.position.head<2>();
  double yaw = pose.yaw;
  integrate_planar(xy, yaw, command);
  const double ground = field.height_at(xy.x(), xy.y());
  const double alpha = 1.0 - std::exp(-dt / config.height_time_constant);
  state.filtered_height += alpha * (ground + config.nominal_height - state.filtered_height);
  const double bob = config.bob_amplitude * std::sin(2.0 * std::numbers::pi * robot.clock.phase);
  pose.position = {xy.x(), xy.y(), state.filtered_height + bob};
  pose.yaw = yaw;
  pose.linear_velocity = (pose.position - old_position) / dt;
  pose.angular_velocity = {0.0, 0.0, deg2rad(command.yaw_rate_deg)};

  const Eigen::Vector2d heading(std::cos(yaw), std::sin(yaw));
  const double cycle = config.gait.cycle_seconds();
  for (int leg = 0; leg < 2; ++leg) {
    const double shift = leg == 0 ? robot.clock.shift_left : robot.clock.shift_right;
    const double u = wrap_unit(robot.clock.phase + shift);
    const Eigen::Vector3d before = robot.feet_world[leg];
    if (u < 0.5) {
      if (state.swinging[leg]) {
        robot.feet_world[leg] = state.plans[leg].target;
        state.swinging[leg] = false;
      }
    } else {
      const double s = (u - 0.5) / 0.5;
      if (!state.swinging[leg]) {
        // Predict the base at touchdown (when u wraps) under the current command.
        const int remaining = static_cast<int>(std::ceil((1.0 - u) / robot.clock.increment - 1e-9));
        Eigen::Vector2d td_xy = xy;
        double td_yaw = yaw;
        for (int k = 0; k < remaining; ++k) {
          integrate_planar(td_xy, td_yaw, command);
        }
        const double side = leg == 0 ? 1.0 : -1.0;
        const Eigen::Vector2d offset(command.vx * cycle / 4.0, command.vy * cycle / 4.0 + side * config.stance_half_width);
        const Eigen::Vector2d td_heading(std::cos(td_yaw), std::sin(td_yaw));
        SwingPlan plan;
        plan.start = before;
        plan.target = snap_foothold(field, td_xy + rotate(td_yaw, offset), td_heading, config);
        const Eigen::Vector2d heel = plan.start.head<2>() - config.foot_half_length * heading;
        const Eigen::Vector2d toe = plan.target.head<2>() + config.foot_half_length * td_heading;
        plan.apex = std::max({field.max_height_along(heel, toe), plan.start.z(), plan.target.z()}) +
                    config.swing_clearance;
        state.plans[leg] = plan;
        state.swinging[leg] = true;
      }
      robot.feet_world[leg] = swing_point(state.plans[leg], s);
    }
    const Eigen::Vector3d& after = robot.feet_world[leg];
    state.foot_accel[leg] = (after - 2.0 * before + state.previous_feet[leg]) / (dt * dt);
    state.previous_feet[leg] = before;
    const Eigen::Vector3d toe_offset(config.foot_half_length * heading.x(), config.foot_half_length * heading.y(), 0.0);
    state.forefoot_touch[leg] = after != before && forefoot_collision_check(field, before + toe_offset, after + toe_offset);
  }
  state.body_contact = pelvis_terrain_height(field, pose, config) > pose.position.z() - config.body_clearance;
}

}  // namespace terrasight
