#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "terrasight/rng.hpp"

namespace terrasight {

enum class TerrainKind : std::uint8_t { Flat = 0, Hills, Blocks, Ridges, Stairs };

inline constexpr std::array<TerrainKind, 5> kTerrainKinds{
    TerrainKind::Flat, TerrainKind::Hills, TerrainKind::Blocks, TerrainKind::Ridges,
    TerrainKind::Stairs};

/// Per-episode terrain kind distribution, indexed like kTerrainKinds.
inline constexpr std::array<double, 5> kTerrainKindProbabilities{0.03, 0.07, 0.35, 0.2, 0.35};

enum class Difficulty : std::uint8_t { Training = 0, EvalEasy, EvalHard };

std::string_view to_string(TerrainKind kind);
std::optional<TerrainKind> parse_terrain_kind(std::string_view name);
std::string_view to_string(Difficulty difficulty);
std::optional<Difficulty> parse_difficulty(std::string_view name);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const noexcept { return v >= lo && v <= hi; }

  bool operator==(const Interval&) const = default;
};

/// One column of the terrain randomization table. Heights and lengths in
/// meters; stair_steps holds integer bounds.
struct TerrainRanges {
  Interval ridge_height;
  Interval stair_rise;
  Interval stair_length;
  Interval stair_steps;
  Interval block_side;
  Interval block_height;
};

TerrainRanges terrain_ranges(Difficulty difficulty);

enum class FeatureShape : std::uint8_t { Block = 0, Ridge, Staircase };

/// Direction in which a staircase climbs from its start edge.
enum class RunDirection : std::uint8_t { PosX = 0, NegX, PosY, NegY };

/// One analytic terrain feature with an axis-aligned footprint
/// [x, x + length] x [y, y + width].
///
/// Blocks and ridges are flat-topped at `height`. A staircase climbs
/// `step_count` steps of rise `height` and tread `step_length` from its start
/// edge; with `has_descent` it then steps back down to the ground over
/// another `step_count` drops, otherwise the top tread runs to the map edge.
/// Ridges and staircases span the full map across their run direction.
struct TerrainFeature {
  FeatureShape shape = FeatureShape::Block;
  double x = 0.0;
  double y = 0.0;
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  double step_length = 0.0;
  int step_count = 0;
  RunDirection direction = RunDirection::PosX;
  bool has_descent = false;

  bool operator==(const TerrainFeature&) const = default;
};

/// Plane wave `amplitude * sin(2*pi/wavelength * (x cos(direction) + y sin(direction)) + phase)`.
struct HillWave {
  double amplitude = 0.0;
  double wavelength = 1.0;
  double direction = 0.0;
  double phase = 0.0;

  bool operator==(const HillWave&) const = default;
};

/// Axis-aligned flat-topped box [x0, x1) x [y0, y1) x [0, height].
struct Prism {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  double height = 0.0;

  bool contains(double x, double y) const noexcept {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
};

/// Generation knobs that the randomization table leaves open.
struct TerrainConfig {
  int block_count = 40;
  int ridge_count = 8;
  int max_placement_attempts = 200;
  Interval ridge_width{0.3, 1.0};
  int hill_wave_count = 8;
  Interval hill_wavelength{2.0, 10.0};
  /// Bound on the summed wave amplitudes; the total is drawn from
  /// [max/2, max].
  double hill_max_amplitude = 0.15;
  /// Clearance kept between a staircase and the map edge.
  double stair_edge_margin = 0.5;
  /// Minimum top landing for a staircase without a descent.
  double stair_min_landing = 1.0;
  double stair_descent_probability = 0.5;
};

/// Rasterized terrain over the fixed 20 m x 20 m map together with the
/// analytic feature list it was built from. Immutable after construction.
///
/// Heights are piecewise constant over disjoint prisms (blocks, ridges,
/// stair treads) plus a smooth wave sum for hills. The raster grid is
/// row-major with y as the slow axis: grid()[iy * kCells + ix] is the height
/// at the center of cell (ix, iy).
class HeightField {
 public:
  static constexpr double kExtent = 20.0;
  static constexpr double kResolution = 0.05;
  static constexpr int kCells = 400;
  /// Acceleration buckets cover [-kOverhang, kExtent + kOverhang]^2.
  static constexpr double kOverhang = 1.0;
  static constexpr double kBucketSize = 0.5;
  static constexpr int kBuckets = 44;

  /// Flat field.
  HeightField();
  HeightField(TerrainKind kind, std::vector<TerrainFeature> features,
              std::vector<HillWave> hills = {});

  TerrainKind kind() const noexcept { return kind_; }
  const std::vector<TerrainFeature>& features() const noexcept { return features_; }
  const std::vector<HillWave>& hills() const noexcept { return hills_; }
  const std::vector<Prism>& prisms() const noexcept { return prisms_; }

  static bool contains(double x, double y) noexcept {
    return x >= 0.0 && x <= kExtent && y >= 0.0 && y <= kExtent;
  }
  static double cell_center(int index) noexcept { return (index + 0.5) * kResolution; }

  /// Analytic ground height. Throws OutOfMapError outside the map.
  double height_at(double x, double y) const;
  /// Analytic ground height with coordinates clamped to the map.
  double height_at_clamped(double x, double y) const noexcept;
  /// Analytic surface continued past the map edge (ground plane plus any
  /// overhanging prisms and the wave sum). Equals height_at on the map.
  double surface_height(double x, double y) const noexcept { return analytic_height(x, y); }

  double cell(int ix, int iy) const { return grid_.at(static_cast<std::size_t>(iy) * kCells + ix); }
  std::span<const double> grid() const noexcept { return grid_; }

  /// Upper/lower bounds on the terrain height anywhere on the map.
  double max_height() const noexcept { return max_height_; }
  double min_height() const noexcept { return min_height_; }
  /// Bound on |grad h| of the smooth (hill) component.
  double hill_slope_bound() const noexcept { return hill_slope_bound_; }
  /// Bound on the second directional derivative of the smooth component.
  double hill_curvature_bound() const noexcept { return hill_curvature_bound_; }

  /// Upper bound on the height along the segment a-b (exact for prisms).
  double max_height_along(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;

  static int bucket_index(double v) noexcept {
    const double cell = std::floor((v + kOverhang) * (1.0 / kBucketSize));
    return static_cast<int>(std::clamp(cell, 0.0, static_cast<double>(kBuckets - 1)));
  }
  static double bucket_origin(int index) noexcept { return -kOverhang + index * kBucketSize; }
  /// Prism indices overlapping bucket (bx, by) and the bucket height bound.
  std::span<const std::uint32_t> bucket_prisms(int bx, int by) const noexcept;
  double bucket_max_height(int bx, int by) const noexcept {
    return bucket_max_[static_cast<std::size_t>(by) * kBuckets + bx];
  }

  /// Smooth component only.
  double hill_height(double x, double y) const noexcept;
  /// Gradient of the smooth component.
  Eigen::Vector2d hill_gradient(double x, double y) const noexcept;
  /// Height and gradient of the smooth component in one pass.
  double hill_height_gradient(double x, double y, Eigen::Vector2d& gradient) const noexcept;
  /// hill_height_gradient at n points; per point bit-identical to the
  /// scalar call.
  void hill_height_gradient_batch(const double* x, const double* y, std::size_t n, double* h, double* gx,
                                  double* gy) const noexcept;

 private:
  double analytic_height(double x, double y) const noexcept;
  void build_prisms();
  void build_buckets();
  void rasterize();

  // Wave parameters, structure-of-arrays.
  struct WaveTable {
    std::vector<double> amplitude;
    std::vector<double> kx;
    std::vector<double> ky;
    std::vector<double> phase;
  };

  /// Per-wave amplitude * sin and amplitude * cos at (x, y).
  void wave_terms(double x, double y, double* s, double* c) const noexcept;

  TerrainKind kind_ = TerrainKind::Flat;
  std::vector<TerrainFeature> features_;
  std::vector<HillWave> hills_;
  WaveTable waves_;
  std::vector<Prism> prisms_;
  std::vector<std::uint32_t> bucket_offsets_;
  std::vector<std::uint32_t> bucket_indices_;
  std::vector<double> bucket_max_;
  std::vector<double> grid_;
  double max_height_ = 0.0;
  double min_height_ = 0.0;
  double hill_slope_bound_ = 0.0;
  double hill_curvature_bound_ = 0.0;
};

TerrainKind sample_terrain_kind(Rng& rng);

/// Draws every feature parameter uniformly from the `difficulty` column.
/// Throws PlacementError when a feature cannot be placed without
/// intersecting an earlier one within the attempt budget.
HeightField generate_terrain(TerrainKind kind, Rng& rng, Difficulty difficulty,
                             const TerrainConfig& config = {});

/// Decomposition of a feature into disjoint prisms (used by HeightField).
std::vector<Prism> feature_prisms(const TerrainFeature& feature);

/// Plateau heights a staircase walks through from its start edge.
std::vector<double> stair_plateau_heights(const TerrainFeature& stairs);

/// True when the open footprints of a and b overlap.
bool footprints_overlap(const TerrainFeature& a, const TerrainFeature& b) noexcept;

/// Human-readable list of parameters outside `ranges` (empty when valid).
std::vector<std::string> range_violations(const TerrainFeature& feature,
                                          const TerrainRanges& ranges,
                                          const TerrainConfig& config = {});

}  // namespace terrasight
