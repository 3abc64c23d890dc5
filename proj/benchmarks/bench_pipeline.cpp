#include <benchmark/benchmark.h>

#include "terrasight/dataset.hpp"
#include "terrasight/depth_noise.hpp"
#include "terrasight/episode.hpp"
#include "terrasight/local_heightmap.hpp"
#include "terrasight/terrain.hpp"

namespace terrasight {
namespace {

HeightField terrain(TerrainKind kind) {
  Rng rng(3);
  return generate_terrain(kind, rng, Difficulty::Training);
}

BasePose pose_over(const HeightField& field) {
  BasePose pose;
  pose.position = {10.0, 10.0, field.height_at(10.0, 10.0) + 0.9};
  pose.yaw = 0.3;
  return pose;
}

void BM_GenerateTerrain(benchmark::State& state) {
  const TerrainKind kind = kTerrainKinds[static_cast<std::size_t>(state.range(0))];
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Rng rng(seed++);
    benchmark::DoNotOptimize(generate_terrain(kind, rng, Difficulty::Training));
  }
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_GenerateTerrain)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);

void BM_ExtractHeightmap(benchmark::State& state) {
  const HeightField field = terrain(kTerrainKinds[static_cast<std::size_t>(state.range(0))]);
  const BasePose pose = pose_over(field);
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_heightmap(field, pose));
  }
  state.SetLabel(std::string(to_string(field.kind())));
}
BENCHMARK(BM_ExtractHeightmap)->DenseRange(0, 4);

void BM_RenderRaw(benchmark::State& state) {
  const HeightField field = terrain(kTerrainKinds[static_cast<std::size_t>(state.range(0))]);
  const BasePose pose = pose_over(field);
  const CameraModel camera;
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_depth(field, pose, camera));
  }
  state.SetItemsProcessed(state.iterations() * camera.raw_width * camera.raw_height);
  state.SetLabel(std::string(to_string(field.kind())));
}
BENCHMARK(BM_RenderRaw)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

void BM_Postprocess(benchmark::State& state) {
  const HeightField field = terrain(TerrainKind::Blocks);
  const CameraModel camera;
  const DepthImage raw = render_depth(field, pose_over(field), camera);
  for (auto _ : state) {
    benchmark::DoNotOptimize(postprocess(raw, camera));
  }
}
BENCHMARK(BM_Postprocess)->Unit(benchmark::kMicrosecond);

void BM_AugmentAllNoise(benchmark::State& state) {
  const HeightField field = terrain(TerrainKind::Stairs);
  const CameraModel camera;
  const DepthImage clean = postprocess(render_depth(field, pose_over(field), camera), camera);
  NoiseConfig config;
  config.probability.fill(1.0);
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(augment(clean, config, rng, camera.clip_min, camera.clip_max));
  }
}
BENCHMARK(BM_AugmentAllNoise)->Unit(benchmark::kMicrosecond);

void BM_EpisodeFrames(benchmark::State& state) {
  EpisodeConfig config;
  config.max_steps = 50;
  std::uint64_t seed = 0;
  std::int64_t frames = 0;
  for (auto _ : state) {
    const EpisodeRecord rec = generate_episode(seed++, config);
    frames += static_cast<std::int64_t>(rec.steps.size());
  }
  state.counters["frames/s"] = benchmark::Counter(static_cast<double>(frames), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_EpisodeFrames)->Unit(benchmark::kMillisecond);

void BM_BlobEncodeDecode(benchmark::State& state) {
  const std::vector<float> depth(400 * 128 * 128, 1.0f);
  for (auto _ : state) {
    const auto bytes = TensorBlob::from_f32({400, 128, 128}, depth).encode();
    benchmark::DoNotOptimize(fnv1a64(bytes));
    benchmark::DoNotOptimize(TensorBlob::decode(bytes));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(depth.size() * sizeof(float)));
}
BENCHMARK(BM_BlobEncodeDecode)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace terrasight

BENCHMARK_MAIN();
