#include "terrasight/local_heightmap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "terrasight/errors.hpp"

namespace terrasight {

Eigen::Matrix3d BasePose::rotation() const {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Quaterniond BasePose::quaternion() const {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
                            Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
                            Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()));
}

double wrap_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(radians, two_pi);
  if (w <= -std::numbers::pi) {
    w += two_pi;
  } else if (w > std::numbers::pi) {
    w -= two_pi;
  }
  return w;
}

Eigen::Vector2d heightmap_cell_world(const BasePose& pose, int row, int col, const HeightmapWindow& window) {
  const double fwd = LocalHeightmap::forward_coordinate(row, window);
  const double lat = LocalHeightmap::lateral_coordinate(col);
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  return {pose.position.x() + c * fwd - s * lat, pose.position.y() + s * fwd + c * lat};
}

LocalHeightmap extract_heightmap(const HeightField& field, const BasePose& pose, const HeightmapWindow& window) {
  // The window is convex, so checking its corners covers every cell.
  const double near = window.forward_offset;
  const double far = window.forward_offset + LocalHeightmap::kRows * LocalHeightmap::kResolution;
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  for (double fwd : {near, far}) {
    for (double lat : {-0.5, 0.5}) {
      const double x = pose.position.x() + c * fwd - s * lat;
      const double y = pose.position.y() + s * fwd + c * lat;
      if (!HeightField::contains(x, y)) {
        std::ostringstream msg;
        msg << "heightmap window corner (" << x << ", " << y << ") is off the map";
        throw OutOfMapError(msg.str());
      }
    }
  }
  LocalHeightmap out;
  for (int row = 0; row < LocalHeightmap::kRows; ++row) {
    for (int col = 0; col < LocalHeightmap::kCols; ++col) {
      const Eigen::Vector2d p = heightmap_cell_world(pose, row, col, window);
      out.at(row, col) = field.height_at(p.x(), p.y()) - pose.position.z();
    }
  }
  return out;
}

HeightmapShift HeightmapNoiseState::sample_step(Rng& rng) const {
  HeightmapShift s;
  s.dx = rng.uniform(-step_xy, step_xy);
  s.dy = rng.uniform(-step_xy, step_xy);
  s.dz = rng.uniform(-step_z, step_z);
  return s;
}

HeightmapNoiseState sample_heightmap_noise(Rng& rng, const HeightmapNoiseBounds& bounds) {
  HeightmapNoiseState state;
  state.episode.dx = rng.uniform(-bounds.episode_xy, bounds.episode_xy);
  state.episode.dy = rng.uniform(-bounds.episode_xy, bounds.episode_xy);
  state.episode.dz = rng.uniform(-bounds.episode_z, bounds.episode_z);
  state.step_xy = bounds.step_xy;
  state.step_z = bounds.step_z;
  state.delay_ms = rng.uniform(bounds.delay_ms.lo, bounds.delay_ms.hi);
  return state;
}

LocalHeightmap apply_shift(const LocalHeightmap& heightmap, const HeightmapShift& shift) {
  // Forward shift moves rows; a shift to the left (+y) moves toward column 0.
  const long row_offset = std::lround(shift.dx / LocalHeightmap::kResolution);
  const long col_offset = -std::lround(shift.dy / LocalHeightmap::kResolution);
  LocalHeightmap out;
  for (int row = 0; row < LocalHeightmap::kRows; ++row) {
    const int src_row = static_cast<int>(std::clamp<long>(row + row_offset, 0, LocalHeightmap::kRows - 1));
    for (int col = 0; col < LocalHeightmap::kCols; ++col) {
      const int src_col = static_cast<int>(std::clamp<long>(col + col_offset, 0, LocalHeightmap::kCols - 1));
      out.at(row, col) = heightmap.at(src_row, src_col) + shift.dz;
    }
  }
  return out;
}

LocalHeightmap apply_randomization(const LocalHeightmap& heightmap, const HeightmapNoiseState& noise, Rng& rng) {
  const HeightmapShift step = noise.sample_step(rng);
  return apply_shift(heightmap, {noise.episode.dx + step.dx, noise.episode.dy + step.dy,
                                 noise.episode.dz + step.dz});
}

const LocalHeightmap& delayed_view(std::span<const TimedHeightmap> history, double now_ms, double delay_ms) {
  if (history.empty()) {
    throw std::invalid_argument("delayed_view: empty history");
  }
  const double cutoff = now_ms - delay_ms;
  const TimedHeightmap* best = &history.front();
  for (const TimedHeightmap& entry : history) {
    if (static_cast<double>(entry.timestamp_ms) <= cutoff) {
      best = &entry;
    }
  }
  return best->heightmap;
}

void HeightmapHistory::push(std::int64_t timestamp_ms, const LocalHeightmap& heightmap) {
  if (!entries_.empty() && timestamp_ms <= entries_.back().timestamp_ms) {
    throw std::invalid_argument("HeightmapHistory: timestamps must increase");
  }
  if (entries_.size() == capacity_) {
    entries_.erase(entries_.begin());
  }
  entries_.push_back({timestamp_ms, heightmap});
}

const LocalHeightmap& HeightmapHistory::delayed(double now_ms, double delay_ms) const {
  return delayed_view(entries_, now_ms, delay_ms);
}

std::vector<FootScan> extract_privileged(const HeightField& field, const BasePose& pose,
                                         std::span<const Eigen::Vector3d> feet_world) {
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  constexpr int half = FootScan::kSide / 2;
  std::vector<FootScan> scans;
  scans.reserve(feet_world.size());
  for (const Eigen::Vector3d& foot : feet_world) {
    FootScan scan;
    for (int row = 0; row < FootScan::kSide; ++row) {
      const double fwd = (half - row) * LocalHeightmap::kResolution;
      for (int col = 0; col < FootScan::kSide; ++col) {
        const double lat = (half - col) * LocalHeightmap::kResolution;
        const double x = foot.x() + c * fwd - s * lat;
        const double y = foot.y() + s * fwd + c * lat;
        scan.heights[static_cast<std::size_t>(row) * FootScan::kSide + col] =
            field.height_at_clamped(x, y) - pose.position.z();
      }
    }
    scan.rangefinder = std::max(0.0, foot.z() - field.height_at_clamped(foot.x(), foot.y()));
    scans.push_back(scan);
  }
  return scans;
}

MirroredObservation mirror_observation(const LocalHeightmap& heightmap, const Command& command,
                                       const ClockState& clock) {
  MirroredObservation out;
  for (int row = 0; row < LocalHeightmap::kRows; ++row) {
    for (int col = 0; col < LocalHeightmap::kCols; ++col) {
      out.heightmap.at(row, col) = heightmap.at(row, LocalHeightmap::kCols - 1 - col);
    }
  }
  out.command = command;
  out.command.vy = -command.vy;
  out.command.yaw_rate_deg = -command.yaw_rate_deg;
  out.clock = clock;
  std::swap(out.clock.shift_left, out.clock.shift_right);
  return out;
}

}  // namespace terrasight
