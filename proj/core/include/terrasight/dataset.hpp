#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "terrasight/episode.hpp"
#include "terrasight/tensor_blob.hpp"

namespace terrasight {

inline constexpr int kDatasetFormatVersion = 1;

/// Per-step blob layouts.
inline constexpr int kKinematicsDim = 23;
inline constexpr int kCommandDim = 4;
inline constexpr int kRewardDim = 4;
inline constexpr int kFeatureDim = 10;
inline constexpr int kHillDim = 4;

/// Terrain features as an f64 [F, kFeatureDim] blob: shape, x, y, length,
/// width, height, step_length, step_count, direction, has_descent.
TensorBlob feature_blob(const std::vector<TerrainFeature>& features);
std::vector<TerrainFeature> features_from_blob(const TensorBlob& blob);
/// Hill waves as an f64 [H, kHillDim] blob: amplitude, wavelength,
/// direction, phase.
TensorBlob hill_blob(const std::vector<HillWave>& hills);
std::vector<HillWave> hills_from_blob(const TensorBlob& blob);

/// 8-bit binary PGM preview: clip_min maps to 0, clip_max to 255, invalid
/// pixels to 0.
std::string encode_pgm(const DepthImage& image, double clip_min, double clip_max);

struct BlobRef {
  /// Relative to the dataset root.
  std::string path;
  std::uint64_t checksum = 0;
  std::uint64_t bytes = 0;

  bool operator==(const BlobRef&) const = default;
};

struct ManifestEntry {
  std::int64_t index = 0;
  /// Seed derived from the master seed; the record's seed is the attempt
  /// that succeeded.
  std::uint64_t episode_seed = 0;
  TerrainKind kind = TerrainKind::Flat;
  int steps = 0;
  TerminationReason termination = TerminationReason::None;
  std::string dir;
  /// Stream name -> file; includes the episode metadata file "episode".
  std::map<std::string, BlobRef> files;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  int format_version = kDatasetFormatVersion;
  std::uint64_t master_seed = 0;
  EpisodeConfig config;
  std::uint64_t config_checksum = 0;
  std::vector<ManifestEntry> episodes;
};

/// Writes the streams of `record` under root/episodes/<index>; every file
/// goes through a temporary and a rename. Throws IoError.
ManifestEntry write_episode(const EpisodeRecord& record, std::int64_t index, std::uint64_t episode_seed,
                            const std::filesystem::path& root);

/// Reads an episode back, verifying each file's checksum and shape. Throws
/// PathError, ChecksumError, VersionError or DimensionError.
EpisodeRecord read_episode(const ManifestEntry& entry, const std::filesystem::path& root);

Manifest read_manifest(const std::filesystem::path& root);

struct GenerateOptions {
  int episodes = 1;
  std::uint64_t seed = 0;
  EpisodeConfig config;
  int workers = 1;
  /// Replace an existing dataset in the output directory.
  bool overwrite = false;
  /// Called on the writer thread after each episode completes.
  std::function<void(std::int64_t done, std::int64_t total)> progress;
};

struct GenerateStats {
  std::int64_t episodes = 0;
  std::int64_t frames = 0;
  std::int64_t retries = 0;
  double seconds = 0.0;
  int workers = 1;

  double frames_per_second() const { return seconds > 0.0 ? frames / seconds : 0.0; }
  double episodes_per_second() const { return seconds > 0.0 ? episodes / seconds : 0.0; }
};

/// Generates a dataset: episodes in parallel, manifest ordered by index and
/// committed last. Timing goes to stats.json, the only file that differs
/// between identical runs.
GenerateStats generate_dataset(const std::filesystem::path& root, const GenerateOptions& options);

struct ValidationReport {
  std::int64_t episodes = 0;
  std::int64_t frames = 0;
  std::int64_t label_mismatches = 0;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty() && label_mismatches == 0; }
};

/// Re-runs every invariant on a stored dataset: checksums, shapes, terrain
/// regeneration, ground-truth labels, stream alignment, value ranges and
/// termination reasons.
ValidationReport validate_dataset(const std::filesystem::path& root);

struct DatasetSummary {
  std::int64_t episodes = 0;
  std::int64_t frames = 0;
  std::array<std::int64_t, 5> kind_counts{};
  std::array<std::int64_t, 5> termination_counts{};
  std::uint64_t bytes = 0;
  /// From stats.json when present.
  double frames_per_second = 0.0;
  double episodes_per_second = 0.0;
  double seconds = 0.0;
  int workers = 0;
};

DatasetSummary summarize_dataset(const std::filesystem::path& root);

/// Two-sided multinomial check: each count lies inside the binomial
/// interval of its probability at the given confidence (normal
/// approximation with continuity correction).
bool within_multinomial_bounds(const std::array<std::int64_t, 5>& counts, const std::array<double, 5>& probabilities,
                               double z = 2.576);

}  // namespace terrasight
