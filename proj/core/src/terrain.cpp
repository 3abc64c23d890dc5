#include "terrasight/terrain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "terrasight/errors.hpp"
#include "wave_math.hpp"

namespace terrasight {

namespace {

// Map-spanning prisms overhang the map so boundary queries stay covered.
constexpr double kOverhang = HeightField::kOverhang;

constexpr std::array<std::string_view, 5> kKindNames{"flat", "hills", "blocks", "ridges", "stairs"};
constexpr std::array<std::string_view, 3> kDifficultyNames{"training", "easy", "hard"};

// Liang-Barsky clip of segment a-b against the closed rectangle.
bool segment_hits_rect(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Prism& p) {
  double t0 = 0.0;
  double t1 = 1.0;
  const Eigen::Vector2d d = b - a;
  const double lows[2] = {p.x0, p.y0};
  const double highs[2] = {p.x1, p.y1};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (a[axis] < lows[axis] || a[axis] > highs[axis]) {
        return false;
      }
      continue;
    }
    double ta = (lows[axis] - a[axis]) / d[axis];
    double tb = (highs[axis] - a[axis]) / d[axis];
    if (ta > tb) {
      std::swap(ta, tb);
    }
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string_view to_string(TerrainKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

std::optional<TerrainKind> parse_terrain_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) {
      return kTerrainKinds[i];
    }
  }
  return std::nullopt;
}

std::string_view to_string(Difficulty difficulty) {
  return kDifficultyNames.at(static_cast<std::size_t>(difficulty));
}

std::optional<Difficulty> parse_difficulty(std::string_view name) {
  for (std::size_t i = 0; i < kDifficultyNames.size(); ++i) {
    if (kDifficultyNames[i] == name) {
      return static_cast<Difficulty>(i);
    }
  }
  return std::nullopt;
}

TerrainRanges terrain_ranges(Difficulty difficulty) {
  switch (difficulty) {
    case Difficulty::Training:
      return {.ridge_height = {0.05, 0.6},
              .stair_rise = {0.05, 0.2},
              .stair_length = {0.25, 0.4},
              .stair_steps = {4, 28},
              .block_side = {0.4, 1.0},
              .block_height = {0.05, 0.4}};
    case Difficulty::EvalEasy:
      return {.ridge_height = {0.05, 0.5},
              .stair_rise = {0.05, 0.1},
              .stair_length = {0.4, 0.4},
              .stair_steps = {4, 12},
              .block_side = {1.0, 1.0},
              .block_height = {0.05, 0.2}};
    case Difficulty::EvalHard:
      return {.ridge_height = {0.5, 0.6},
              .stair_rise = {0.1, 0.2},
              .stair_length = {0.25, 0.4},
              .stair_steps = {12, 28},
              .block_side = {0.4, 1.0},
              .block_height = {0.2, 0.4}};
  }
  return {};
}

std::vector<Prism> feature_prisms(const TerrainFeature& f) {
  std::vector<Prism> prisms;
  switch (f.shape) {
    case FeatureShape::Block:
      prisms.push_back({f.x, f.y, f.x + f.length, f.y + f.width, f.height});
      break;
    case FeatureShape::Ridge: {
      const bool spans_y = f.width >= HeightField::kExtent;
      if (spans_y) {
        prisms.push_back({f.x, -kOverhang, f.x + f.length, HeightField::kExtent + kOverhang, f.height});
      } else {
        prisms.push_back({-kOverhang, f.y, HeightField::kExtent + kOverhang, f.y + f.width, f.height});
      }
      break;
    }
    case FeatureShape::Staircase: {
      const bool along_x = f.direction == RunDirection::PosX || f.direction == RunDirection::NegX;
      const bool positive = f.direction == RunDirection::PosX || f.direction == RunDirection::PosY;
      const double lo = along_x ? f.x : f.y;
      const double hi = lo + (along_x ? f.length : f.width);
      const double start = positive ? lo : hi;
      const int n = f.step_count;
      const int treads = f.has_descent ? 2 * n - 1 : n;
      for (int k = 0; k < treads; ++k) {
        const int level = k < n ? k + 1 : 2 * n - 1 - k;
        double u0 = k * f.step_length;
        double u1 = (k + 1) * f.step_length;
        double a0 = positive ? start + u0 : start - u1;
        double a1 = positive ? start + u1 : start - u0;
        if (!f.has_descent && k == n - 1) {
          // Top landing runs to the map edge.
          if (positive) {
            a1 = HeightField::kExtent + kOverhang;
          } else {
            a0 = -kOverhang;
          }
        }
        const double h = level * f.height;
        if (along_x) {
          prisms.push_back({a0, -kOverhang, a1, HeightField::kExtent + kOverhang, h});
        } else {
          prisms.push_back({-kOverhang, a0, HeightField::kExtent + kOverhang, a1, h});
        }
      }
      break;
    }
  }
  return prisms;
}

std::vector<double> stair_plateau_heights(const TerrainFeature& stairs) {
  std::vector<double> heights;
  const int n = stairs.step_count;
  heights.push_back(0.0);
  for (int k = 1; k <= n; ++k) {
    heights.push_back(k * stairs.height);
  }
  if (stairs.has_descent) {
    for (int k = n - 1; k >= 0; --k) {
      heights.push_back(k * stairs.height);
    }
  }
  return heights;
}

bool footprints_overlap(const TerrainFeature& a, const TerrainFeature& b) noexcept {
  return a.x < b.x + b.length && b.x < a.x + a.length && a.y < b.y + b.width && b.y < a.y + a.width;
}

std::vector<std::string> range_violations(const TerrainFeature& f, const TerrainRanges& r,
                                          const TerrainConfig& config) {
  std::vector<std::string> out;
  auto check = [&out](std::string_view name, double value, const Interval& range) {
    if (!range.contains(value)) {
      std::ostringstream msg;
      msg << name << " = " << value << " outside [" << range.lo << ", " << range.hi << "]";
      out.push_back(msg.str());
    }
  };
  switch (f.shape) {
    case FeatureShape::Block:
      check("block length", f.length, r.block_side);
      check("block width", f.width, r.block_side);
      check("block height", f.height, r.block_height);
      break;
    case FeatureShape::Ridge:
      check("ridge height", f.height, r.ridge_height);
      check("ridge width", std::min(f.length, f.width), config.ridge_width);
      break;
    case FeatureShape::Staircase:
      check("stair rise", f.height, r.stair_rise);
      check("stair length", f.step_length, r.stair_length);
      check("stair steps", f.step_count, r.stair_steps);
      break;
  }
  const double eps = 1e-9;
  if (f.x < -eps || f.y < -eps || f.x + f.length > HeightField::kExtent + eps ||
      f.y + f.width > HeightField::kExtent + eps) {
    out.push_back("footprint leaves the map");
  }
  return out;
}

HeightField::HeightField() : HeightField(TerrainKind::Flat, {}, {}) {}

HeightField::HeightField(TerrainKind kind, std::vector<TerrainFeature> features,
                         std::vector<HillWave> hills)
    : kind_(kind), features_(std::move(features)), hills_(std::move(hills)) {
  double amplitude_sum = 0.0;
  for (const HillWave& w : hills_) {
    const double k = 2.0 * std::numbers::pi / w.wavelength;
    waves_.amplitude.push_back(w.amplitude);
    waves_.kx.push_back(k * std::cos(w.direction));
    waves_.ky.push_back(k * std::sin(w.direction));
    waves_.phase.push_back(w.phase);
    amplitude_sum += std::abs(w.amplitude);
    hill_slope_bound_ += std::abs(w.amplitude) * k;
    hill_curvature_bound_ += std::abs(w.amplitude) * k * k;
  }
  build_prisms();
  double prism_max = 0.0;
  for (const Prism& p : prisms_) {
    prism_max = std::max(prism_max, p.height);
  }
  max_height_ = prism_max + amplitude_sum;
  min_height_ = -amplitude_sum;
  build_buckets();
  rasterize();
}

void HeightField::build_prisms() {
  for (const TerrainFeature& f : features_) {
    for (const Prism& p : feature_prisms(f)) {
      prisms_.push_back(p);
    }
  }
}

void HeightField::build_buckets() {
  const std::size_t count = static_cast<std::size_t>(kBuckets) * kBuckets;
  std::vector<std::vector<std::uint32_t>> lists(count);
  for (std::uint32_t i = 0; i < prisms_.size(); ++i) {
    const Prism& p = prisms_[i];
    const int bx0 = bucket_index(p.x0);
    const int bx1 = bucket_index(p.x1);
    const int by0 = bucket_index(p.y0);
    const int by1 = bucket_index(p.y1);
    for (int by = by0; by <= by1; ++by) {
      for (int bx = bx0; bx <= bx1; ++bx) {
        lists[static_cast<std::size_t>(by) * kBuckets + bx].push_back(i);
      }
    }
  }
  const double hill_bound = -min_height_;
  bucket_offsets_.assign(count + 1, 0);
  bucket_max_.assign(count, hill_bound);
  for (std::size_t b = 0; b < count; ++b) {
    bucket_offsets_[b + 1] = bucket_offsets_[b] + static_cast<std::uint32_t>(lists[b].size());
    for (std::uint32_t i : lists[b]) {
      bucket_indices_.push_back(i);
      bucket_max_[b] = std::max(bucket_max_[b], prisms_[i].height + hill_bound);
    }
  }
}

namespace {

#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__)
#define TERRASIGHT_WAVE_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define TERRASIGHT_WAVE_CLONES
#endif

// Heights only, along a row at fixed y; same argument rounding as eval_waves.
TERRASIGHT_WAVE_CLONES
void accumulate_wave_height(double amplitude, double kx, double ky_y, double phase, const double* x, std::size_t n,
                            double* h) {
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0.0;
    double c = 0.0;
    detail::wave_sincos(kx * x[p] + ky_y + phase, s, c);
    h[p] += amplitude * s;
  }
}

}  // namespace

void HeightField::rasterize() {
  const std::size_t cells = static_cast<std::size_t>(kCells) * kCells;
  grid_.assign(cells, 0.0);
  std::array<double, kCells> centers;
  for (int i = 0; i < kCells; ++i) {
    centers[i] = cell_center(i);
  }
  if (!waves_.amplitude.empty()) {
    // Rows in batch, with the same sums as hill_height.
    for (int iy = 0; iy < kCells; ++iy) {
      double* row = grid_.data() + static_cast<std::size_t>(iy) * kCells;
      for (std::size_t i = 0; i < waves_.amplitude.size(); ++i) {
        accumulate_wave_height(waves_.amplitude[i], waves_.kx[i], waves_.ky[i] * centers[iy], waves_.phase[i],
                               centers.data(), kCells, row);
      }
    }
  }
  if (prisms_.empty()) {
    return;
  }
  // Paint prism owners in reverse so the lowest index wins, as in the
  // bucket scan of analytic_height.
  constexpr std::uint32_t kNone = ~0u;
  std::vector<std::uint32_t> owner(cells, kNone);
  const auto cell_range = [](double lo, double hi) {
    const int a = std::max(0, static_cast<int>(std::floor(lo / kResolution - 0.5)) - 1);
    const int b = std::min(kCells - 1, static_cast<int>(std::ceil(hi / kResolution - 0.5)) + 1);
    return std::pair{a, b};
  };
  for (std::size_t k = prisms_.size(); k-- > 0;) {
    const Prism& p = prisms_[k];
    const auto [x0, x1] = cell_range(p.x0, p.x1);
    const auto [y0, y1] = cell_range(p.y0, p.y1);
    for (int iy = y0; iy <= y1; ++iy) {
      for (int ix = x0; ix <= x1; ++ix) {
        if (p.contains(centers[ix], centers[iy])) {
          owner[static_cast<std::size_t>(iy) * kCells + ix] = static_cast<std::uint32_t>(k);
        }
      }
    }
  }
  for (std::size_t c = 0; c < cells; ++c) {
    if (owner[c] != kNone) {
      grid_[c] += prisms_[owner[c]].height;
    }
  }
}

std::span<const std::uint32_t> HeightField::bucket_prisms(int bx, int by) const noexcept {
  const std::size_t b = static_cast<std::size_t>(by) * kBuckets + bx;
  return {bucket_indices_.data() + bucket_offsets_[b], bucket_offsets_[b + 1] - bucket_offsets_[b]};
}

namespace {

// Element-wise only: no reductions, so every clone returns identical bits.
TERRASIGHT_WAVE_CLONES
void eval_waves(const double* amplitude, const double* kx, const double* ky, const double* phase, std::size_t n,
                double x, double y, double* s_out, double* c_out) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    double c = 0.0;
    detail::wave_sincos(kx[i] * x + ky[i] * y + phase[i], s, c);
    s_out[i] = amplitude[i] * s;
    c_out[i] = amplitude[i] * c;
  }
}

// Adds one wave's height and gradient terms at n points, in the same
// operation order as eval_waves plus the sums in hill_height_gradient.
TERRASIGHT_WAVE_CLONES
void accumulate_wave(double amplitude, double kx, double ky, double phase, const double* x, const double* y,
                     std::size_t n, double* h, double* gx, double* gy) {
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0.0;
    double c = 0.0;
    detail::wave_sincos(kx * x[p] + ky * y[p] + phase, s, c);
    const double ac = amplitude * c;
    h[p] += amplitude * s;
    gx[p] += ac * kx;
    gy[p] += ac * ky;
  }
}

constexpr std::size_t kWaveChunk = 16;

}  // namespace

void HeightField::wave_terms(double x, double y, double* s, double* c) const noexcept {
  const std::size_t n = waves_.amplitude.size();
  for (std::size_t i = 0; i < n; i += kWaveChunk) {
    eval_waves(waves_.amplitude.data() + i, waves_.kx.data() + i, waves_.ky.data() + i, waves_.phase.data() + i,
               std::min(kWaveChunk, n - i), x, y, s + i, c + i);
  }
}

double HeightField::hill_height(double x, double y) const noexcept {
  Eigen::Vector2d unused;
  return hill_height_gradient(x, y, unused);
}

Eigen::Vector2d HeightField::hill_gradient(double x, double y) const noexcept {
  Eigen::Vector2d g;
  hill_height_gradient(x, y, g);
  return g;
}

double HeightField::hill_height_gradient(double x, double y, Eigen::Vector2d& gradient) const noexcept {
  const std::size_t n = waves_.amplitude.size();
  double s_small[kWaveChunk];
  double c_small[kWaveChunk];
  std::vector<double> s_large;
  std::vector<double> c_large;
  double* s = s_small;
  double* c = c_small;
  if (n > kWaveChunk) {
    s_large.resize(n);
    c_large.resize(n);
    s = s_large.data();
    c = c_large.data();
  }
  wave_terms(x, y, s, c);
  double h = 0.0;
  double gx = 0.0;
  double gy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    h += s[i];
    gx += c[i] * waves_.kx[i];
    gy += c[i] * waves_.ky[i];
  }
  gradient = {gx, gy};
  return h;
}

void HeightField::hill_height_gradient_batch(const double* x, const double* y, std::size_t n, double* h, double* gx,
                                             double* gy) const noexcept {
  std::fill(h, h + n, 0.0);
  std::fill(gx, gx + n, 0.0);
  std::fill(gy, gy + n, 0.0);
  for (std::size_t i = 0; i < waves_.amplitude.size(); ++i) {
    accumulate_wave(waves_.amplitude[i], waves_.kx[i], waves_.ky[i], waves_.phase[i], x, y, n, h, gx, gy);
  }
}

double HeightField::analytic_height(double x, double y) const noexcept {
  double h = waves_.amplitude.empty() ? 0.0 : hill_height(x, y);
  for (std::uint32_t i : bucket_prisms(bucket_index(x), bucket_index(y))) {
    if (prisms_[i].contains(x, y)) {
      h += prisms_[i].height;
      break;
    }
  }
  return h;
}

double HeightField::height_at(double x, double y) const {
  if (!contains(x, y)) {
    std::ostringstream msg;
    msg << "terrain query (" << x << ", " << y << ") is outside the " << kExtent << " m map";
    throw OutOfMapError(msg.str());
  }
  return analytic_height(x, y);
}

double HeightField::height_at_clamped(double x, double y) const noexcept {
  // Stay inside the half-open prism footprints so the last cell replicates.
  const double hi = std::nextafter(kExtent, 0.0);
  return analytic_height(std::clamp(x, 0.0, hi), std::clamp(y, 0.0, hi));
}

double HeightField::max_height_along(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
  double best = std::max(height_at_clamped(a.x(), a.y()), height_at_clamped(b.x(), b.y()));
  for (const Prism& p : prisms_) {
    if (p.height > best && segment_hits_rect(a, b, p)) {
      best = p.height;
    }
  }
  if (!waves_.amplitude.empty()) {
    // Sample the smooth part and pad by the slope bound over half a sample.
    const double len = (b - a).norm();
    const double spacing = 0.01;
    const int samples = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    double hill_max = -1e300;
    for (int i = 0; i <= samples; ++i) {
      const Eigen::Vector2d p = a + (b - a) * (static_cast<double>(i) / samples);
      hill_max = std::max(hill_max, hill_height(p.x(), p.y()));
    }
    best = std::max(best, hill_max + hill_slope_bound_ * spacing);
  }
  return best;
}

TerrainKind sample_terrain_kind(Rng& rng) {
  return kTerrainKinds[rng.categorical(kTerrainKindProbabilities)];
}

namespace {

double draw(Rng& rng, const Interval& range) { return rng.uniform(range.lo, range.hi); }

[[noreturn]] void placement_failure(std::string_view what, std::size_t placed, int attempts) {
  std::ostringstream msg;
  msg << "could not place " << what << " #" << placed + 1 << " after " << attempts
      << " attempts; the requested feature density is too high";
  throw PlacementError(msg.str());
}

bool overlaps_any(const TerrainFeature& candidate, const std::vector<TerrainFeature>& placed) {
  return std::any_of(placed.begin(), placed.end(),
                     [&](const TerrainFeature& f) { return footprints_overlap(candidate, f); });
}

std::vector<HillWave> generate_hills(Rng& rng, const TerrainConfig& config) {
  std::vector<HillWave> waves(static_cast<std::size_t>(config.hill_wave_count));
  double weight_sum = 0.0;
  for (HillWave& w : waves) {
    w.amplitude = rng.uniform01() + 1e-3;
    w.wavelength = draw(rng, config.hill_wavelength);
    w.direction = rng.uniform(0.0, 2.0 * std::numbers::pi);
    w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    weight_sum += w.amplitude;
  }
  const double total = rng.uniform(0.5 * config.hill_max_amplitude, config.hill_max_amplitude);
  for (HillWave& w : waves) {
    w.amplitude *= total / weight_sum;
  }
  return waves;
}

std::vector<TerrainFeature> generate_blocks(Rng& rng, const TerrainRanges& r, const TerrainConfig& config) {
  std::vector<TerrainFeature> blocks;
  for (int n = 0; n < config.block_count; ++n) {
    bool placed = false;
    for (int attempt = 0; attempt < config.max_placement_attempts && !placed; ++attempt) {
      TerrainFeature f;
      f.shape = FeatureShape::Block;
      f.length = draw(rng, r.block_side);
      f.width = draw(rng, r.block_side);
      f.height = draw(rng, r.block_height);
      f.x = rng.uniform(0.0, HeightField::kExtent - f.length);
      f.y = rng.uniform(0.0, HeightField::kExtent - f.width);
      if (!overlaps_any(f, blocks)) {
        blocks.push_back(f);
        placed = true;
      }
    }
    if (!placed) {
      placement_failure("block", blocks.size(), config.max_placement_attempts);
    }
  }
  return blocks;
}

std::vector<TerrainFeature> generate_ridges(Rng& rng, const TerrainRanges& r, const TerrainConfig& config) {
  std::vector<TerrainFeature> ridges;
  const bool spans_y = rng.bernoulli(0.5);
  for (int n = 0; n < config.ridge_count; ++n) {
    bool placed = false;
    for (int attempt = 0; attempt < config.max_placement_attempts && !placed; ++attempt) {
      TerrainFeature f;
      f.shape = FeatureShape::Ridge;
      const double width = draw(rng, config.ridge_width);
      const double offset = rng.uniform(0.0, HeightField::kExtent - width);
      f.height = draw(rng, r.ridge_height);
      if (spans_y) {
        f.x = offset;
        f.length = width;
        f.y = 0.0;
        f.width = HeightField::kExtent;
      } else {
        f.x = 0.0;
        f.length = HeightField::kExtent;
        f.y = offset;
        f.width = width;
      }
      if (!overlaps_any(f, ridges)) {
        ridges.push_back(f);
        placed = true;
      }
    }
    if (!placed) {
      placement_failure("ridge", ridges.size(), config.max_placement_attempts);
    }
  }
  return ridges;
}

TerrainFeature generate_stairs(Rng& rng, const TerrainRanges& r, const TerrainConfig& config) {
  TerrainFeature f;
  f.shape = FeatureShape::Staircase;
  f.height = draw(rng, r.stair_rise);
  f.step_length = draw(rng, r.stair_length);
  f.step_count = static_cast<int>(rng.uniform_int(static_cast<std::int64_t>(r.stair_steps.lo),
                                                  static_cast<std::int64_t>(r.stair_steps.hi)));
  f.direction = static_cast<RunDirection>(rng.uniform_int(0, 3));

  const double usable = HeightField::kExtent - 2.0 * config.stair_edge_margin;
  const double descent_len = (2 * f.step_count - 1) * f.step_length;
  f.has_descent = descent_len <= usable && rng.bernoulli(config.stair_descent_probability);
  const double run = f.has_descent ? descent_len : f.step_count * f.step_length + config.stair_min_landing;
  if (run > usable) {
    placement_failure("staircase", 0, 1);
  }
  // Distance of the start edge from the map edge it faces away from.
  const double start_offset = rng.uniform(config.stair_edge_margin, config.stair_edge_margin + usable - run);

  const bool along_x = f.direction == RunDirection::PosX || f.direction == RunDirection::NegX;
  const bool positive = f.direction == RunDirection::PosX || f.direction == RunDirection::PosY;
  double lo = 0.0;
  double extent = 0.0;
  if (positive) {
    lo = start_offset;
    extent = f.has_descent ? descent_len : HeightField::kExtent - start_offset;
  } else {
    const double start = HeightField::kExtent - start_offset;
    lo = f.has_descent ? start - descent_len : 0.0;
    extent = start - lo;
  }
  if (along_x) {
    f.x = lo;
    f.length = extent;
    f.y = 0.0;
    f.width = HeightField::kExtent;
  } else {
    f.x = 0.0;
    f.length = HeightField::kExtent;
    f.y = lo;
    f.width = extent;
  }
  return f;
}

}  // namespace

HeightField generate_terrain(TerrainKind kind, Rng& rng, Difficulty difficulty, const TerrainConfig& config) {
  const TerrainRanges ranges = terrain_ranges(difficulty);
  switch (kind) {
    case TerrainKind::Flat:
      return HeightField(kind, {}, {});
    case TerrainKind::Hills:
      return HeightField(kind, {}, generate_hills(rng, config));
    case TerrainKind::Blocks:
      return HeightField(kind, generate_blocks(rng, ranges, config));
    case TerrainKind::Ridges:
      return HeightField(kind, generate_ridges(rng, ranges, config));
    case TerrainKind::Stairs:
      return HeightField(kind, {generate_stairs(rng, ranges, config)});
  }
  return HeightField();
}

}  // namespace terrasight
