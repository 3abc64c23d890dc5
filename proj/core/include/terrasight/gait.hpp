#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "terrasight/rng.hpp"
#include "terrasight/terrain.hpp"

namespace terrasight {

inline constexpr double kControlPeriodMs = 20.0;
inline constexpr double kControlPeriodS = 0.02;

/// Periodic gait clock. Phase and per-leg shifts are cycle fractions in [0, 1).
struct ClockState {
  double phase = 0.0;
  double increment = 1.0 / 28.0;
  double shift_left = 0.0;
  double shift_right = 0.5;

  bool operator==(const ClockState&) const = default;
};

/// Clock action limits. The nominal increment gives a 0.56 s cycle at 50 Hz.
struct GaitConfig {
  double nominal_increment = 1.0 / 28.0;
  /// Allowed relative deviation of the increment from nominal.
  double increment_tolerance = 0.3;
  /// Largest per-step change of a leg shift.
  double max_shift_delta = 0.05;

  double cycle_seconds() const { return kControlPeriodS / nominal_increment; }
};

/// sin/cos of 2*pi*(phase + shift) for the left then the right leg:
/// {sin_l, cos_l, sin_r, cos_r}.
std::array<double, 4> clock_signals(const ClockState& clock);

/// Wraps a cycle fraction into [0, 1).
double wrap_unit(double value);

/// Advances the clock by one control step.
ClockState advance(const ClockState& clock, double phase_increment, double shift_left_delta,
                   double shift_right_delta);

/// Clamps a clock action into the configured limits.
std::array<double, 3> clamp_clock_action(const GaitConfig& config, double phase_increment,
                                         double shift_left_delta, double shift_right_delta);

enum class CommandMode : std::uint8_t { StepInPlace = 0, StepInPlaceTurn, Walk, WalkTurn };

inline constexpr std::array<double, 4> kCommandModeProbabilities{0.05, 0.05, 0.6, 0.3};

std::string_view to_string(CommandMode mode);

/// User command; velocities in the yaw-aligned base frame.
struct Command {
  CommandMode mode = CommandMode::StepInPlace;
  double vx = 0.0;
  double vy = 0.0;
  double yaw_rate_deg = 0.0;

  bool operator==(const Command&) const = default;
};

struct CommandRanges {
  Interval vx{-0.5, 1.0};
  Interval vy{-0.3, 0.3};
  Interval yaw_rate_deg{-22.5, 22.5};
};

/// True on terrains where only forward motion is commanded.
bool forward_only_terrain(TerrainKind kind);

Command sample_command(Rng& rng, TerrainKind kind, const CommandRanges& ranges = {});

struct CommandSwitch {
  int step = 0;
  Command command;

  bool operator==(const CommandSwitch&) const = default;
};

struct ScheduleConfig {
  int switch_min_step = 200;
  int switch_max_step = 250;
};

/// Initial command at step 0 followed by exactly one switch.
std::vector<CommandSwitch> command_schedule(Rng& rng, TerrainKind kind, int episode_length,
                                            const CommandRanges& ranges = {},
                                            const ScheduleConfig& schedule = {});

/// Command active at `step` under `schedule`.
const Command& command_at(const std::vector<CommandSwitch>& schedule, int step);

}  // namespace terrasight
