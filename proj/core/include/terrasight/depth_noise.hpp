#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include <Eigen/Core>

#include "terrasight/depth_camera.hpp"
#include "terrasight/rng.hpp"
#include "terrasight/terrain.hpp"

namespace terrasight {

/// Half-widths of the per-episode camera randomization.
struct CameraRandomizationBounds {
  double position = 0.01;
  double pitch_deg = 1.0;
  double fov_deg = 1.0;
};

/// One draw of the per-episode camera shift.
struct CameraRandomization {
  Eigen::Vector3d position_shift = Eigen::Vector3d::Zero();
  double pitch_shift_deg = 0.0;
  /// Added to both the horizontal and the vertical field of view.
  double fov_shift_deg = 0.0;

  bool operator==(const CameraRandomization&) const = default;
};

CameraRandomization sample_camera_randomization(Rng& rng, const CameraRandomizationBounds& bounds = {});
CameraModel apply_camera_randomization(const CameraModel& camera, const CameraRandomization& shift);

/// Draws a shift and applies it. `drawn`, when given, receives the shift.
CameraModel randomize_camera(const CameraModel& camera, Rng& rng, const CameraRandomizationBounds& bounds = {},
                             CameraRandomization* drawn = nullptr);

enum class NoiseType : std::uint8_t { Gaussian = 0, Rotation, Edge, Objects, Spots };
inline constexpr std::array<NoiseType, 5> kNoiseTypes{NoiseType::Gaussian, NoiseType::Rotation, NoiseType::Edge,
                                                        NoiseType::Objects, NoiseType::Spots};
std::string_view to_string(NoiseType type);

/// Per-image noise stack. Probabilities are indexed like kNoiseTypes.
struct NoiseConfig {
  std::array<double, 5> probability{0.3, 0.3, 0.3, 0.3, 0.3};
  /// Gaussian sigma as a fraction of the depth.
  double gaussian_sigma_ratio = 0.01;
  double rotation_max_deg = 3.0;
  /// Depth jump (m) between 4-neighbors that marks an edge.
  double edge_gradient = 0.1;
  int edge_dilation_px = 2;
  Interval object_count{1, 3};
  Interval object_radius_px{3.0, 10.0};
  Interval spot_count{1, 5};
  Interval spot_radius_px{2.0, 6.0};

  double probability_of(NoiseType type) const { return probability[static_cast<std::size_t>(type)]; }
  /// Throws ConfigError on probabilities outside [0, 1] or bad ranges.
  void validate() const;

  bool operator==(const NoiseConfig&) const = default;
};

struct AugmentResult {
  DepthImage image;
  /// Which noise types were applied, indexed like kNoiseTypes.
  std::array<bool, 5> applied{};
};

/// Applies each noise type independently with its probability, in the
/// fixed order rotation, edge, objects, spots, gaussian. The output is
/// fully valid and clamped to [clip_min, clip_max].
AugmentResult augment(const DepthImage& image, const NoiseConfig& config, Rng& rng, double clip_min,
                      double clip_max);

// Individual stages, exposed for tests and the CLI.
DepthImage rotate_image(const DepthImage& image, double angle_deg);
DepthImage edge_noise(const DepthImage& image, double gradient, int dilation_px);
DepthImage add_objects(const DepthImage& image, const NoiseConfig& config, Rng& rng, double clip_min);
DepthImage spot_noise(const DepthImage& image, const NoiseConfig& config, Rng& rng);
DepthImage gaussian_noise(const DepthImage& image, double sigma_ratio, Rng& rng);

}  // namespace terrasight
