#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "terrasight/depth_camera.hpp"
#include "terrasight/depth_noise.hpp"
#include "terrasight/gait.hpp"
#include "terrasight/local_heightmap.hpp"
#include "terrasight/reward.hpp"
#include "terrasight/terrain.hpp"
#include "terrasight/walker.hpp"

namespace terrasight {

/// Every knob of episode generation.
struct EpisodeConfig {
  int max_steps = 400;
  Difficulty difficulty = Difficulty::Training;
  std::array<double, 5> terrain_probabilities = kTerrainKindProbabilities;
  TerrainConfig terrain;
  CommandRanges commands;
  ScheduleConfig schedule;
  WalkerConfig walker;
  CameraModel camera;
  CameraRandomizationBounds camera_bounds;
  NoiseConfig noise;
  HeightmapNoiseBounds heightmap_noise;
  TerminationConfig termination;
  BaseRewardConfig reward;
  /// Spawn XY is uniform in a disc of this radius around the map center.
  double spawn_radius = 0.5;
  /// Attempts per episode index before generation gives up.
  int max_attempts = 20;

  /// Throws ConfigError when a parameter is out of range.
  void validate() const;
};

/// Number of entries in the per-step observation state vector.
inline constexpr int kStateDim = 18;

/// Observation state: feet in the base frame (6), clock signals (4), base
/// linear velocity in the yaw frame (3), angular velocity (3), roll, pitch.
std::array<float, kStateDim> observation_state(const RobotState& state);

struct StepRecord {
  RobotState state;
  /// Augmented 128 x 128 depth frame.
  DepthImage depth;
  /// Undelayed ground-truth heightmap, rounded to float precision.
  LocalHeightmap label;
  /// Delayed, shifted heightmap as an on-robot estimator would report it,
  /// rounded to float precision.
  LocalHeightmap observed;
  Command command;
  RewardBreakdown reward;
  TerminationReason termination = TerminationReason::None;
  std::array<bool, 5> noise_applied{};
  /// Foot swinging flags after the step.
  std::array<bool, 2> swinging{};

  bool operator==(const StepRecord&) const = default;
};

struct EpisodeRecord {
  std::uint64_t seed = 0;
  TerrainKind kind = TerrainKind::Flat;
  std::vector<TerrainFeature> features;
  std::vector<HillWave> hills;
  /// Attempts used; 1 when the first seed succeeded.
  int attempts = 1;
  double spawn_x = 0.0;
  double spawn_y = 0.0;
  double spawn_yaw = 0.0;
  CameraRandomization camera_shift;
  CameraModel camera;
  HeightmapNoiseState heightmap_noise;
  NoiseConfig noise;
  std::vector<CommandSwitch> schedule;
  std::vector<StepRecord> steps;
  /// Final step's reason; None when the episode ran to max_steps.
  TerminationReason termination = TerminationReason::None;

  bool operator==(const EpisodeRecord&) const = default;
};

/// Rounds every cell to float precision; labels are stored as 32-bit floats.
LocalHeightmap round_to_float(const LocalHeightmap& heightmap);

/// Rolls out one episode on `field`. All randomness derives from `seed`.
/// Throws EpisodeAborted when the walker or a sensor window leaves the map or
/// the camera ends up inside the terrain.
EpisodeRecord rollout_episode(const HeightField& field, std::uint64_t seed, const EpisodeConfig& config);

/// Seed of episode `index` under the master seed.
inline std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t index) { return master_seed ^ index; }

/// Terrain kind of an episode, fixed across retries.
TerrainKind episode_terrain_kind(std::uint64_t seed, const EpisodeConfig& config);

/// Builds the terrain of one attempt.
HeightField episode_terrain(TerrainKind kind, std::uint64_t attempt_seed, const EpisodeConfig& config);

/// Seed of retry `attempt` (0 is the episode seed itself).
std::uint64_t attempt_seed(std::uint64_t seed, int attempt);

/// Generates terrain and rollout for one dataset episode, retrying aborted
/// attempts with derived seeds. Throws EpisodeAborted after max_attempts.
EpisodeRecord generate_episode(std::uint64_t seed, const EpisodeConfig& config);

}  // namespace terrasight
