#include "terrasight/episode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "terrasight/errors.hpp"

namespace terrasight {

void EpisodeConfig::validate() const {
  if (max_steps < 1 || max_steps > 400) {
    throw ConfigError("max_steps must lie in [1, 400]");
  }
  double total = 0.0;
  for (double p : terrain_probabilities) {
    if (!(p >= 0.0)) {
      throw ConfigError("terrain probabilities must be non-negative");
    }
    total += p;
  }
  if (!(total > 0.0)) {
    throw ConfigError("terrain probabilities must not all be zero");
  }
  if (!(spawn_radius >= 0.0 && spawn_radius <= 5.0)) {
    throw ConfigError("spawn_radius must lie in [0, 5]");
  }
  if (max_attempts < 1) {
    throw ConfigError("max_attempts must be at least 1");
  }
  if (schedule.switch_min_step < 1 || schedule.switch_min_step > schedule.switch_max_step) {
    throw ConfigError("invalid command switch window");
  }
  if (!(walker.nominal_height > 0.0 && walker.height_time_constant > 0.0 && walker.foothold_search >= 0.0)) {
    throw ConfigError("invalid walker parameters");
  }
  if (!(walker.gait.nominal_increment > 0.0 && walker.gait.nominal_increment < 0.5)) {
    throw ConfigError("gait increment must lie in (0, 0.5)");
  }
  for (const Interval* range : {&commands.vx, &commands.vy, &commands.yaw_rate_deg, &terrain.ridge_width,
                                &terrain.hill_wavelength, &heightmap_noise.delay_ms}) {
    if (!(range->lo <= range->hi)) {
      throw ConfigError("a min/max pair is inverted");
    }
  }
  if (!(heightmap_noise.delay_ms.lo >= 0.0 && heightmap_noise.episode_xy >= 0.0 && heightmap_noise.step_xy >= 0.0 &&
        heightmap_noise.episode_z >= 0.0 && heightmap_noise.step_z >= 0.0)) {
    throw ConfigError("heightmap noise bounds must be non-negative");
  }
  if (!(camera_bounds.position >= 0.0 && camera_bounds.pitch_deg >= 0.0 && camera_bounds.fov_deg >= 0.0)) {
    throw ConfigError("camera randomization bounds must be non-negative");
  }
  if (terrain.block_count < 0 || terrain.ridge_count < 0 || terrain.hill_wave_count < 1 ||
      terrain.max_placement_attempts < 1 || !(terrain.hill_wavelength.lo > 0.0) ||
      !(terrain.stair_descent_probability >= 0.0 && terrain.stair_descent_probability <= 1.0)) {
    throw ConfigError("invalid terrain generation parameters");
  }
  camera.validate();
  noise.validate();
}

std::array<float, kStateDim> observation_state(const RobotState& state) {
  std::array<float, kStateDim> out{};
  std::size_t k = 0;
  for (const Eigen::Vector3d& foot : state.feet_local()) {
    for (int i = 0; i < 3; ++i) {
      out[k++] = static_cast<float>(foot[i]);
    }
  }
  for (double s : clock_signals(state.clock)) {
    out[k++] = static_cast<float>(s);
  }
  const double c = std::cos(state.pose.yaw);
  const double s = std::sin(state.pose.yaw);
  const Eigen::Vector3d& v = state.pose.linear_velocity;
  out[k++] = static_cast<float>(c * v.x() + s * v.y());
  out[k++] = static_cast<float>(-s * v.x() + c * v.y());
  out[k++] = static_cast<float>(v.z());
  for (int i = 0; i < 3; ++i) {
    out[k++] = static_cast<float>(state.pose.angular_velocity[i]);
  }
  out[k++] = static_cast<float>(state.pose.roll);
  out[k++] = static_cast<float>(state.pose.pitch);
  return out;
}

LocalHeightmap round_to_float(const LocalHeightmap& heightmap) {
  LocalHeightmap out = heightmap;
  for (double& v : out.values()) {
    v = static_cast<float>(v);
  }
  return out;
}

TerrainKind episode_terrain_kind(std::uint64_t seed, const EpisodeConfig& config) {
  Rng rng = make_stream(seed, Stream::TerrainKind);
  return kTerrainKinds[rng.categorical(config.terrain_probabilities)];
}

HeightField episode_terrain(TerrainKind kind, std::uint64_t attempt_seed, const EpisodeConfig& config) {
  Rng rng = make_stream(attempt_seed, Stream::Terrain);
  return generate_terrain(kind, rng, config.difficulty, config.terrain);
}

std::uint64_t attempt_seed(std::uint64_t seed, int attempt) {
  if (attempt == 0) {
    return seed;
  }
  return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(Stream::Retry)), static_cast<std::uint64_t>(attempt));
}

EpisodeRecord rollout_episode(const HeightField& field, std::uint64_t seed, const EpisodeConfig& config) {
  EpisodeRecord rec;
  rec.seed = seed;
  rec.kind = field.kind();
  rec.features = field.features();
  rec.hills = field.hills();
  rec.noise = config.noise;

  Rng spawn_rng = make_stream(seed, Stream::Spawn);
  const double radius = config.spawn_radius * std::sqrt(spawn_rng.uniform01());
  const double angle = spawn_rng.uniform(-std::numbers::pi, std::numbers::pi);
  rec.spawn_x = 0.5 * HeightField::kExtent + radius * std::cos(angle);
  rec.spawn_y = 0.5 * HeightField::kExtent + radius * std::sin(angle);
  rec.spawn_yaw = wrap_angle(spawn_rng.uniform(-std::numbers::pi, std::numbers::pi));

  Rng command_rng = make_stream(seed, Stream::Commands);
  // Short episodes keep the same draws; the switch then falls past the end.
  const int schedule_length = std::max(config.max_steps, config.schedule.switch_max_step + 1);
  rec.schedule = command_schedule(command_rng, rec.kind, schedule_length, config.commands, config.schedule);

  Rng camera_rng = make_stream(seed, Stream::Camera);
  rec.camera = randomize_camera(config.camera, camera_rng, config.camera_bounds, &rec.camera_shift);
  Rng heightmap_rng = make_stream(seed, Stream::HeightmapNoise);
  rec.heightmap_noise = sample_heightmap_noise(heightmap_rng, config.heightmap_noise);
  Rng image_rng = make_stream(seed, Stream::ImageNoise);

  const auto abort = [&](const std::string& why, int step) {
    throw EpisodeAborted("episode seed " + std::to_string(seed) + " aborted at step " + std::to_string(step) + ": " +
                         why);
  };

  int step = 0;
  try {
    WalkerState walker = spawn_walker(field, rec.spawn_x, rec.spawn_y, rec.spawn_yaw, config.walker);
    HeightmapHistory history(8);
    rec.steps.reserve(static_cast<std::size_t>(config.max_steps));
    for (step = 0; step < config.max_steps; ++step) {
      StepRecord out;
      out.command = command_at(rec.schedule, step);
      surrogate_step(walker, out.command, field, config.walker);
      const RobotState& robot = walker.robot;
      out.state = robot;
      out.swinging = walker.swinging;

      const LocalHeightmap truth = extract_heightmap(field, robot.pose);
      out.label = round_to_float(truth);
      history.push(robot.timestamp_ms, truth);
      const LocalHeightmap& delayed =
          history.delayed(static_cast<double>(robot.timestamp_ms), rec.heightmap_noise.delay_ms);
      out.observed = round_to_float(apply_randomization(delayed, rec.heightmap_noise, heightmap_rng));

      const DepthImage raw = render_depth(field, robot.pose, rec.camera);
      if (raw.camera_inside_terrain) {
        abort("camera inside terrain", step);
      }
      AugmentResult noisy =
          augment(postprocess(raw, rec.camera), config.noise, image_rng, rec.camera.clip_min, rec.camera.clip_max);
      out.depth = std::move(noisy.image);
      out.noise_applied = noisy.applied;

      std::array<LegContact, 2> legs;
      for (int leg = 0; leg < 2; ++leg) {
        const Eigen::Vector3d& foot = robot.feet_world[leg];
        legs[leg].in_contact = !walker.swinging[leg];
        legs[leg].clearance = foot.z() - field.height_at(foot.x(), foot.y());
      }
      out.reward = combine_rewards(base_reward(robot.clock, legs, config.reward),
                                   reward_accel(walker.foot_accel[0], walker.foot_accel[1]),
                                   reward_collision(walker.forefoot_touch[0] || walker.forefoot_touch[1]));
      out.termination = check_termination(robot.pose, out.command, field, walker.body_contact, config.termination);
      rec.steps.push_back(std::move(out));
      if (rec.steps.back().termination != TerminationReason::None) {
        rec.termination = rec.steps.back().termination;
        break;
      }
    }
  } catch (const OutOfMapError& e) {
    abort(e.what(), step);
  }
  return rec;
}

EpisodeRecord generate_episode(std::uint64_t seed, const EpisodeConfig& config) {
  const TerrainKind kind = episode_terrain_kind(seed, config);
  std::string last_error;
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const std::uint64_t s = attempt_seed(seed, attempt);
    try {
      const HeightField field = episode_terrain(kind, s, config);
      EpisodeRecord rec = rollout_episode(field, s, config);
      rec.attempts = attempt + 1;
      return rec;
    } catch (const EpisodeAborted& e) {
      last_error = e.what();
    } catch (const PlacementError& e) {
      last_error = e.what();
    }
  }
  throw EpisodeAborted("episode seed " + std::to_string(seed) + " failed after " +
                       std::to_string(config.max_attempts) + " attempts; last error: " + last_error);
}

}  // namespace terrasight
