#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace terrasight {

/// Seeded random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Distributions are implemented here because the algorithms
/// behind the <random> distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform in [lo, hi); returns lo when lo == hi.
  double uniform(double lo, double hi);

  /// Uniform integer in the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p);

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

  /// Index drawn with probability proportional to weights[i].
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of an independent sub-stream identified by `stream` under `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Sub-stream tags used by the pipeline.
enum class Stream : std::uint64_t {
  TerrainKind = 1,
  Terrain = 2,
  Spawn = 3,
  Commands = 4,
  Camera = 5,
  HeightmapNoise = 6,
  ImageNoise = 7,
  Retry = 8,
};

inline Rng make_stream(std::uint64_t seed, Stream stream) {
  return Rng(derive_seed(seed, static_cast<std::uint64_t>(stream)));
}

}  // namespace terrasight
