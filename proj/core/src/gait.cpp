#include "terrasight/gait.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace terrasight {

std::array<double, 4> clock_signals(const ClockState& clock) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double left = two_pi * (clock.phase + clock.shift_left);
  const double right = two_pi * (clock.phase + clock.shift_right);
  return {std::sin(left), std::cos(left), std::sin(right), std::cos(right)};
}

double wrap_unit(double value) {
  double w = value - std::floor(value);
  // floor can round a tiny negative value up to exactly 1.
  return w >= 1.0 ? 0.0 : w;
}

ClockState advance(const ClockState& clock, double phase_increment, double shift_left_delta,
                   double shift_right_delta) {
  ClockState next;
  next.phase = wrap_unit(clock.phase + phase_increment);
  next.increment = phase_increment;
  next.shift_left = wrap_unit(clock.shift_left + shift_left_delta);
  next.shift_right = wrap_unit(clock.shift_right + shift_right_delta);
  return next;
}

std::array<double, 3> clamp_clock_action(const GaitConfig& config, double phase_increment,
                                         double shift_left_delta, double shift_right_delta) {
  const double lo = config.nominal_increment * (1.0 - config.increment_tolerance);
  const double hi = config.nominal_increment * (1.0 + config.increment_tolerance);
  const double s = config.max_shift_delta;
  return {std::clamp(phase_increment, lo, hi), std::clamp(shift_left_delta, -s, s),
          std::clamp(shift_right_delta, -s, s)};
}

std::string_view to_string(CommandMode mode) {
  switch (mode) {
    case CommandMode::StepInPlace:
      return "step_in_place";
    case CommandMode::StepInPlaceTurn:
      return "step_in_place_turn";
    case CommandMode::Walk:
      return "walk";
    case CommandMode::WalkTurn:
      return "walk_turn";
  }
  return "unknown";
}

bool forward_only_terrain(TerrainKind kind) {
  return kind == TerrainKind::Ridges || kind == TerrainKind::Stairs || kind == TerrainKind::Blocks;
}

Command sample_command(Rng& rng, TerrainKind kind, const CommandRanges& ranges) {
  Command cmd;
  cmd.mode = static_cast<CommandMode>(rng.categorical(kCommandModeProbabilities));
  const bool forward_only = forward_only_terrain(kind);
  const bool walks = cmd.mode == CommandMode::Walk || cmd.mode == CommandMode::WalkTurn;
  const bool turns = cmd.mode == CommandMode::StepInPlaceTurn || cmd.mode == CommandMode::WalkTurn;
  if (walks) {
    const double vx_lo = forward_only ? std::max(0.0, ranges.vx.lo) : ranges.vx.lo;
    cmd.vx = rng.uniform(vx_lo, ranges.vx.hi);
    cmd.vy = forward_only ? 0.0 : rng.uniform(ranges.vy.lo, ranges.vy.hi);
  }
  if (turns) {
    cmd.yaw_rate_deg = rng.uniform(ranges.yaw_rate_deg.lo, ranges.yaw_rate_deg.hi);
  }
  return cmd;
}

std::vector<CommandSwitch> command_schedule(Rng& rng, TerrainKind kind, int episode_length,
                                            const CommandRanges& ranges, const ScheduleConfig& schedule) {
  if (episode_length <= schedule.switch_max_step) {
    throw std::invalid_argument("command_schedule: episode shorter than the switch window");
  }
  std::vector<CommandSwitch> out;
  out.push_back({0, sample_command(rng, kind, ranges)});
  const int at = static_cast<int>(rng.uniform_int(schedule.switch_min_step, schedule.switch_max_step));
  out.push_back({at, sample_command(rng, kind, ranges)});
  return out;
}

const Command& command_at(const std::vector<CommandSwitch>& schedule, int step) {
  const Command* active = &schedule.front().command;
  for (const CommandSwitch& s : schedule) {
    if (s.step <= step) {
      active = &s.command;
    }
  }
  return *active;
}

}  // namespace terrasight
