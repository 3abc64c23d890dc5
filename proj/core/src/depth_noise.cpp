#include "terrasight/depth_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "terrasight/errors.hpp"

namespace terrasight {

CameraRandomization sample_camera_randomization(Rng& rng, const CameraRandomizationBounds& bounds) {
  CameraRandomization shift;
  for (int k = 0; k < 3; ++k) {
    shift.position_shift[k] = rng.uniform(-bounds.position, bounds.position);
  }
  shift.pitch_shift_deg = rng.uniform(-bounds.pitch_deg, bounds.pitch_deg);
  shift.fov_shift_deg = rng.uniform(-bounds.fov_deg, bounds.fov_deg);
  return shift;
}

CameraModel apply_camera_randomization(const CameraModel& camera, const CameraRandomization& shift) {
  CameraModel out = camera;
  out.mount_offset += shift.position_shift;
  out.tilt_deg += shift.pitch_shift_deg;
  out.hfov_deg += shift.fov_shift_deg;
  out.vfov_deg += shift.fov_shift_deg;
  return out;
}

CameraModel randomize_camera(const CameraModel& camera, Rng& rng, const CameraRandomizationBounds& bounds,
                             CameraRandomization* drawn) {
  const CameraRandomization shift = sample_camera_randomization(rng, bounds);
  if (drawn != nullptr) {
    *drawn = shift;
  }
  return apply_camera_randomization(camera, shift);
}

std::string_view to_string(NoiseType type) {
  switch (type) {
    case NoiseType::Gaussian: return "gaussian";
    case NoiseType::Rotation: return "rotation";
    case NoiseType::Edge: return "edge";
    case NoiseType::Objects: return "objects";
    case NoiseType::Spots: return "spots";
  }
  return "unknown";
}

void NoiseConfig::validate() const {
  for (NoiseType type : kNoiseTypes) {
    const double p = probability_of(type);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("noise probability for " + std::string(to_string(type)) + " must lie in [0, 1]");
    }
  }
  auto check = [](const Interval& range, double min_lo, const char* name) {
    if (!(range.lo >= min_lo && range.lo <= range.hi)) {
      throw ConfigError(std::string("invalid range for ") + name);
    }
  };
  check(object_count, 0.0, "object count");
  check(object_radius_px, 0.0, "object radius");
  check(spot_count, 0.0, "spot count");
  check(spot_radius_px, 0.0, "spot radius");
  if (gaussian_sigma_ratio < 0.0 || rotation_max_deg < 0.0 || edge_gradient < 0.0 || edge_dilation_px < 0) {
    throw ConfigError("noise magnitudes must be non-negative");
  }
}

DepthImage rotate_image(const DepthImage& image, double angle_deg) {
  const int w = image.width();
  const int h = image.height();
  DepthImage out(w, h);
  out.camera_inside_terrain = image.camera_inside_terrain;
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(a);
  const double s = std::sin(a);
  const double cx = 0.5 * w;
  const double cy = 0.5 * h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse-rotate the output pixel center into the source image.
      const double dx = x + 0.5 - cx;
      const double dy = y + 0.5 - cy;
      const double sx = std::clamp(c * dx + s * dy + cx - 0.5, 0.0, w - 1.0);
      const double sy = std::clamp(-s * dx + c * dy + cy - 0.5, 0.0, h - 1.0);
      const int x0 = std::min(static_cast<int>(sx), w - 1);
      const int y0 = std::min(static_cast<int>(sy), h - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - x0;
      const double fy = sy - y0;
      const double top = (1.0 - fx) * image.at(x0, y0) + fx * image.at(x1, y0);
      const double bottom = (1.0 - fx) * image.at(x0, y1) + fx * image.at(x1, y1);
      out.at(x, y) = static_cast<float>((1.0 - fy) * top + fy * bottom);
    }
  }
  return out;
}

DepthImage edge_noise(const DepthImage& image, double gradient, int dilation_px) {
  const int w = image.width();
  const int h = image.height();
  std::vector<std::uint8_t> edge(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float d = image.at(x, y);
      const bool jump = (x + 1 < w && std::abs(image.at(x + 1, y) - d) > gradient) ||
                        (x > 0 && std::abs(image.at(x - 1, y) - d) > gradient) ||
                        (y + 1 < h && std::abs(image.at(x, y + 1) - d) > gradient) ||
                        (y > 0 && std::abs(image.at(x, y - 1) - d) > gradient);
      edge[static_cast<std::size_t>(y) * w + x] = jump ? 1 : 0;
    }
  }
  DepthImage out = image;
  std::size_t invalidated = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool near = false;
      for (int dy = -dilation_px; dy <= dilation_px && !near; ++dy) {
        for (int dx = -dilation_px; dx <= dilation_px && !near; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          near = nx >= 0 && ny >= 0 && nx < w && ny < h && edge[static_cast<std::size_t>(ny) * w + nx] != 0;
        }
      }
      if (near) {
        out.set_valid(x, y, false);
        ++invalidated;
      }
    }
  }
  if (invalidated == 0 || invalidated == out.size()) {
    return image;
  }
  return fill_holes(out);
}

DepthImage add_objects(const DepthImage& image, const NoiseConfig& config, Rng& rng, double clip_min) {
  DepthImage out = image;
  const int w = out.width();
  const int h = out.height();
  const auto count = rng.uniform_int(static_cast<std::int64_t>(config.object_count.lo),
                                     static_cast<std::int64_t>(config.object_count.hi));
  for (std::int64_t k = 0; k < count; ++k) {
    const double cx = rng.uniform(0.0, w);
    const double cy = rng.uniform(0.0, h);
    const double rx = rng.uniform(config.object_radius_px.lo, config.object_radius_px.hi);
    const double ry = rng.uniform(config.object_radius_px.lo, config.object_radius_px.hi);
    const int ix = std::clamp(static_cast<int>(cx), 0, w - 1);
    const int iy = std::clamp(static_cast<int>(cy), 0, h - 1);
    const double behind = out.at(ix, iy);
    const double depth = rng.uniform(clip_min, std::max(clip_min, behind));
    for (int y = std::max(0, static_cast<int>(cy - ry)); y < std::min(h, static_cast<int>(cy + ry) + 1); ++y) {
      for (int x = std::max(0, static_cast<int>(cx - rx)); x < std::min(w, static_cast<int>(cx + rx) + 1); ++x) {
        const double u = (x + 0.5 - cx) / rx;
        const double v = (y + 0.5 - cy) / ry;
        if (u * u + v * v <= 1.0) {
          out.at(x, y) = static_cast<float>(depth);
        }
      }
    }
  }
  return out;
}

DepthImage spot_noise(const DepthImage& image, const NoiseConfig& config, Rng& rng) {
  DepthImage out = image;
  const int w = out.width();
  const int h = out.height();
  const auto count = rng.uniform_int(static_cast<std::int64_t>(config.spot_count.lo),
                                     static_cast<std::int64_t>(config.spot_count.hi));
  for (std::int64_t k = 0; k < count; ++k) {
    const double cx = rng.uniform(0.0, w);
    const double cy = rng.uniform(0.0, h);
    const double r = rng.uniform(config.spot_radius_px.lo, config.spot_radius_px.hi);
    for (int y = std::max(0, static_cast<int>(cy - r)); y < std::min(h, static_cast<int>(cy + r) + 1); ++y) {
      for (int x = std::max(0, static_cast<int>(cx - r)); x < std::min(w, static_cast<int>(cx + r) + 1); ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= r * r) {
          out.set_valid(x, y, false);
        }
      }
    }
  }
  if (out.fully_invalid()) {
    return image;
  }
  return fill_holes(out);
}

DepthImage gaussian_noise(const DepthImage& image, double sigma_ratio, Rng& rng) {
  DepthImage out = image;
  for (float& v : out.depth()) {
    v = static_cast<float>(v + sigma_ratio * v * rng.normal());
  }
  return out;
}

AugmentResult augment(const DepthImage& image, const NoiseConfig& config, Rng& rng, double clip_min,
                      double clip_max) {
  AugmentResult result;
  // Decide every type first so application rates do not depend on
  // how many variates the stages consume.
  for (NoiseType type : kNoiseTypes) {
    result.applied[static_cast<std::size_t>(type)] = rng.bernoulli(config.probability_of(type));
  }
  auto on = [&](NoiseType type) { return result.applied[static_cast<std::size_t>(type)]; };

  DepthImage img = image;
  if (on(NoiseType::Rotation)) {
    img = rotate_image(img, rng.uniform(-config.rotation_max_deg, config.rotation_max_deg));
  }
  if (on(NoiseType::Edge)) {
    img = edge_noise(img, config.edge_gradient, config.edge_dilation_px);
  }
  if (on(NoiseType::Objects)) {
    img = add_objects(img, config, rng, clip_min);
  }
  if (on(NoiseType::Spots)) {
    img = spot_noise(img, config, rng);
  }
  if (on(NoiseType::Gaussian)) {
    img = gaussian_noise(img, config.gaussian_sigma_ratio, rng);
  }
  const float lo = static_cast<float>(clip_min);
  const float hi = static_cast<float>(clip_max);
  for (float& v : img.depth()) {
    v = std::clamp(v, lo, hi);
  }
  result.image = std::move(img);
  return result;
}

}  // namespace terrasight
