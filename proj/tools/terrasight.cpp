#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "terrasight/dataset.hpp"
#include "terrasight/errors.hpp"
#include "terrasight/run_config.hpp"
#include "terrasight/tensor_blob.hpp"

namespace fs = std::filesystem;
using namespace terrasight;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitValidation = 4;

// Bad flag values found after parsing; reported like parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

TerrainKind kind_arg(const std::string& name) {
  const auto kind = parse_terrain_kind(name);
  if (!kind) {
    throw UsageError("unknown terrain kind '" + name + "' (flat, hills, blocks, ridges, stairs)");
  }
  return *kind;
}

// Config file first, then command-line overrides.
EpisodeConfig load_run_config(const std::string& config_path, const std::string& difficulty) {
  EpisodeConfig config = config_path.empty() ? EpisodeConfig{} : load_config(config_path);
  if (!difficulty.empty()) {
    const auto d = parse_difficulty(difficulty);
    if (!d) {
      throw UsageError("unknown difficulty '" + difficulty + "' (training, easy, hard)");
    }
    config.difficulty = *d;
  }
  config.validate();
  return config;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      throw UsageError("bad number '" + item + "' in '" + text + "'");
    }
  }
  return out;
}

double deg2rad(double deg) { return deg * 3.14159265358979323846 / 180.0; }

// "x,y,yaw" puts the base at nominal height above the ground; the long form
// is "x,y,z,yaw[,pitch,roll]". Angles in degrees.
BasePose parse_pose(const std::string& text, const HeightField& field, const EpisodeConfig& config) {
  const std::vector<double> v = parse_numbers(text);
  BasePose pose;
  if (v.size() == 3) {
    pose.position = {v[0], v[1], field.height_at_clamped(v[0], v[1]) + config.walker.nominal_height};
    pose.yaw = deg2rad(v[2]);
  } else if (v.size() == 4 || v.size() == 6) {
    pose.position = {v[0], v[1], v[2]};
    pose.yaw = deg2rad(v[3]);
    if (v.size() == 6) {
      pose.pitch = deg2rad(v[4]);
      pose.roll = deg2rad(v[5]);
    }
  } else {
    throw UsageError("--pose takes x,y,yaw or x,y,z,yaw[,pitch,roll]");
  }
  return pose;
}

void write_pgm(const fs::path& path, const DepthImage& image, double lo, double hi) {
  write_text_atomic(path, encode_pgm(image, lo, hi));
}

DepthImage depth_from_blob(const TensorBlob& blob, int frame) {
  const auto& dims = blob.dims();
  if (blob.dtype() != DType::F32 || (dims.size() != 2 && dims.size() != 3)) {
    throw DimensionError("expected an f32 [H, W] or [T, H, W] depth blob, found " + std::string(to_string(blob.dtype())) +
                         " " + shape_string(dims));
  }
  const std::size_t frames = dims.size() == 3 ? dims[0] : 1;
  if (frame < 0 || static_cast<std::size_t>(frame) >= frames) {
    throw UsageError("--frame " + std::to_string(frame) + " outside [0, " + std::to_string(frames) + ")");
  }
  const int h = static_cast<int>(dims[dims.size() - 2]);
  const int w = static_cast<int>(dims[dims.size() - 1]);
  const std::vector<float> values = blob.to_f32();
  DepthImage image(w, h);
  std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(frame) * w * h, static_cast<std::size_t>(w) * h,
              image.depth().begin());
  return image;
}

void print_image_stats(const DepthImage& image) {
  float lo = INFINITY;
  float hi = -INFINITY;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (image.valid(x, y)) {
        lo = std::min(lo, image.at(x, y));
        hi = std::max(hi, image.at(x, y));
      }
    }
  }
  std::printf("image %dx%d valid %zu/%zu depth [%.4f, %.4f] m\n", image.width(), image.height(), image.valid_count(),
              image.size(), lo, hi);
}

int cmd_terrain(const std::string& kind_name, std::uint64_t seed, const std::string& difficulty,
                const std::string& config_path, const fs::path& out) {
  const EpisodeConfig config = load_run_config(config_path, difficulty);
  const HeightField field = episode_terrain(kind_arg(kind_name), seed, config);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    throw IoError("cannot create " + out.string() + ": " + ec.message());
  }
  const std::uint32_t n = HeightField::kCells;
  const std::vector<double> grid(field.grid().begin(), field.grid().end());
  write_file_atomic(out / "heightfield.tblob", TensorBlob::from_f64({n, n}, grid).encode());
  write_file_atomic(out / "terrain_features.tblob", feature_blob(field.features()).encode());
  write_file_atomic(out / "terrain_hills.tblob", hill_blob(field.hills()).encode());
  // Top-down preview, north up: row 0 is the largest y.
  DepthImage preview(HeightField::kCells, HeightField::kCells);
  for (int iy = 0; iy < HeightField::kCells; ++iy) {
    for (int ix = 0; ix < HeightField::kCells; ++ix) {
      preview.at(ix, HeightField::kCells - 1 - iy) = static_cast<float>(field.cell(ix, iy));
    }
  }
  const double span = std::max(field.max_height() - field.min_height(), 1e-3);
  write_pgm(out / "heightfield.pgm", preview, field.min_height(), field.min_height() + span);

  std::printf("kind %s difficulty %s seed %llu\n", std::string(to_string(field.kind())).c_str(),
              std::string(to_string(config.difficulty)).c_str(), static_cast<unsigned long long>(seed));
  std::printf("height [%.4f, %.4f] m, %zu features, %zu hill waves\n", field.min_height(), field.max_height(),
              field.features().size(), field.hills().size());
  for (const TerrainFeature& f : field.features()) {
    std::printf("  shape %d at (%.3f, %.3f) length %.3f width %.3f height %.3f steps %d x %.3f\n",
                static_cast<int>(f.shape), f.x, f.y, f.length, f.width, f.height, f.step_count, f.step_length);
  }
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int cmd_render(const std::string& kind_name, std::uint64_t seed, const std::string& difficulty,
               const std::string& config_path, const std::string& pose_text, bool raw, const fs::path& out,
               const std::string& blob_out) {
  const EpisodeConfig config = load_run_config(config_path, difficulty);
  const HeightField field = episode_terrain(kind_arg(kind_name), seed, config);
  const double c = 0.5 * HeightField::kExtent;
  const BasePose pose = parse_pose(pose_text.empty() ? std::to_string(c) + "," + std::to_string(c) + ",0" : pose_text,
                                   field, config);
  const DepthImage rendered = render_depth(field, pose, config.camera);
  if (rendered.camera_inside_terrain) {
    std::fprintf(stderr, "warning: camera is inside the terrain\n");
  }
  const DepthImage image = raw ? rendered : postprocess(rendered, config.camera);
  write_pgm(out, image, config.camera.clip_min, config.camera.clip_max);
  if (!blob_out.empty()) {
    std::vector<float> values(image.depth().begin(), image.depth().end());
    const auto h = static_cast<std::uint32_t>(image.height());
    const auto w = static_cast<std::uint32_t>(image.width());
    write_file_atomic(blob_out, TensorBlob::from_f32({h, w}, values).encode());
  }
  std::printf("pose (%.3f, %.3f, %.3f) yaw %.2f deg\n", pose.position.x(), pose.position.y(), pose.position.z(),
              pose.yaw * 180.0 / 3.14159265358979323846);
  print_image_stats(image);
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int cmd_augment(const fs::path& in, int frame, std::uint64_t seed, const std::string& config_path,
                const fs::path& out, const std::string& blob_out) {
  const EpisodeConfig config = load_run_config(config_path, "");
  const DepthImage image = depth_from_blob(TensorBlob::decode(read_file(in)), frame);
  Rng rng = make_stream(seed, Stream::ImageNoise);
  const AugmentResult result = augment(image, config.noise, rng, config.camera.clip_min, config.camera.clip_max);
  write_pgm(out, result.image, config.camera.clip_min, config.camera.clip_max);
  if (!blob_out.empty()) {
    std::vector<float> values(result.image.depth().begin(), result.image.depth().end());
    const auto h = static_cast<std::uint32_t>(result.image.height());
    const auto w = static_cast<std::uint32_t>(result.image.width());
    write_file_atomic(blob_out, TensorBlob::from_f32({h, w}, values).encode());
  }
  std::printf("applied:");
  bool any = false;
  for (std::size_t k = 0; k < kNoiseTypes.size(); ++k) {
    if (result.applied[k]) {
      std::printf(" %s", std::string(to_string(kNoiseTypes[k])).c_str());
      any = true;
    }
  }
  std::printf("%s\n", any ? "" : " none");
  print_image_stats(result.image);
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int cmd_generate(int episodes, std::uint64_t seed, const fs::path& out, const std::string& config_path,
                 const std::string& difficulty, int workers, bool overwrite, bool quiet) {
  GenerateOptions options;
  options.episodes = episodes;
  options.seed = seed;
  options.config = load_run_config(config_path, difficulty);
  options.workers = workers;
  options.overwrite = overwrite;
  if (!quiet) {
    options.progress = [](std::int64_t done, std::int64_t total) {
      std::fprintf(stderr, "\r%lld/%lld episodes", static_cast<long long>(done), static_cast<long long>(total));
      if (done == total) {
        std::fprintf(stderr, "\n");
      }
    };
  }
  const GenerateStats stats = generate_dataset(out, options);
  std::printf("episodes %lld frames %lld retries %lld workers %d\n", static_cast<long long>(stats.episodes),
              static_cast<long long>(stats.frames), static_cast<long long>(stats.retries), stats.workers);
  std::printf("elapsed %.2f s, %.1f frames/s, %.3f episodes/s\n", stats.seconds, stats.frames_per_second(),
              stats.episodes_per_second());
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int cmd_inspect(const fs::path& root) {
  const Manifest manifest = read_manifest(root);
  const DatasetSummary summary = summarize_dataset(root);
  std::printf("dataset %s\n", root.string().c_str());
  std::printf("format version %d, master seed %llu, difficulty %s\n", manifest.format_version,
              static_cast<unsigned long long>(manifest.master_seed),
              std::string(to_string(manifest.config.difficulty)).c_str());
  std::printf("episodes %lld, frames %lld, %.1f MiB\n", static_cast<long long>(summary.episodes),
              static_cast<long long>(summary.frames), summary.bytes / (1024.0 * 1024.0));
  if (summary.episodes > 0) {
    std::printf("mean episode length %.1f steps\n", static_cast<double>(summary.frames) / summary.episodes);
  }
  const std::array<double, 5>& probs = manifest.config.terrain_probabilities;
  double total_p = 0.0;
  for (double p : probs) {
    total_p += p;
  }
  std::array<double, 5> normalized{};
  std::printf("\nterrain kind   count  share  expected\n");
  for (std::size_t k = 0; k < kTerrainKinds.size(); ++k) {
    normalized[k] = probs[k] / total_p;
    const double share = summary.episodes ? static_cast<double>(summary.kind_counts[k]) / summary.episodes : 0.0;
    std::printf("  %-10s %6lld  %5.3f  %5.3f  %s\n", std::string(to_string(kTerrainKinds[k])).c_str(),
                static_cast<long long>(summary.kind_counts[k]), share, normalized[k],
                std::string(static_cast<std::size_t>(std::lround(share * 40.0)), '#').c_str());
  }
  std::printf("kind histogram within 99%% multinomial bounds: %s\n",
              within_multinomial_bounds(summary.kind_counts, normalized) ? "yes" : "no");
  std::printf("\ntermination    count\n");
  for (std::size_t k = 0; k < summary.termination_counts.size(); ++k) {
    std::printf("  %-13s %6lld\n", std::string(to_string(static_cast<TerminationReason>(k))).c_str(),
                static_cast<long long>(summary.termination_counts[k]));
  }
  if (summary.seconds > 0.0) {
    std::printf("\ngeneration: %.2f s with %d workers, %.1f frames/s, %.3f episodes/s\n", summary.seconds,
                summary.workers, summary.frames_per_second, summary.episodes_per_second);
  } else {
    std::printf("\ngeneration: no stats.json, throughput unknown\n");
  }
  return 0;
}

int cmd_validate(const fs::path& root) {
  // A missing dataset is a path problem, not a failed validation.
  read_file(root / "manifest.json");
  const ValidationReport report = validate_dataset(root);
  for (const std::string& e : report.errors) {
    std::fprintf(stderr, "error: %s\n", e.c_str());
  }
  std::printf("episodes %lld, frames %lld, label mismatches %lld, errors %zu\n",
              static_cast<long long>(report.episodes), static_cast<long long>(report.frames),
              static_cast<long long>(report.label_mismatches), report.errors.size());
  std::printf("%s\n", report.ok() ? "valid" : "INVALID");
  return report.ok() ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Procedural terrain, depth rendering and heightmap dataset generation", "terrasight"};
  app.set_version_flag("--version", "terrasight 0.1.0");
  app.require_subcommand(1);

  std::string kind = "flat";
  std::uint64_t seed = 0;
  std::string difficulty;
  std::string config_path;
  std::string out;
  std::string dataset_out = "dataset";
  std::string pose;
  std::string blob_out;
  std::string input;
  std::string dataset;
  bool raw = false;
  int frame = 0;
  int episodes = 1;
  int workers = std::max(1u, std::thread::hardware_concurrency());
  bool overwrite = false;
  bool quiet = false;

  auto* terrain = app.add_subcommand("terrain", "Generate one terrain and write its height grid, features and preview");
  terrain->add_option("--kind", kind, "flat, hills, blocks, ridges or stairs")->required();
  terrain->add_option("--seed", seed, "Terrain seed");
  terrain->add_option("--difficulty", difficulty, "training, easy or hard");
  terrain->add_option("--config", config_path, "Run configuration file");
  terrain->add_option("--out", out, "Output directory")->required();

  auto* render = app.add_subcommand("render", "Render one depth frame to a PGM preview");
  render->add_option("--kind", kind, "Terrain kind");
  render->add_option("--seed", seed, "Terrain seed");
  render->add_option("--difficulty", difficulty, "training, easy or hard");
  render->add_option("--config", config_path, "Run configuration file");
  render->add_option("--pose", pose, "x,y,yaw or x,y,z,yaw[,pitch,roll] (m, deg); default map center");
  render->add_flag("--raw", raw, "Skip post-processing and write the raw-resolution frame");
  render->add_option("--out", out, "Output PGM")->required();
  render->add_option("--blob", blob_out, "Also write the depth as an f32 [H, W] tensor blob");

  auto* augment_cmd = app.add_subcommand("augment", "Apply the noise stack to a stored depth image");
  augment_cmd->add_option("--in", input, "f32 [H, W] or [T, H, W] depth blob")->required()->check(CLI::ExistingFile);
  augment_cmd->add_option("--frame", frame, "Frame of a [T, H, W] blob");
  augment_cmd->add_option("--seed", seed, "Noise seed");
  augment_cmd->add_option("--config", config_path, "Run configuration file");
  augment_cmd->add_option("--out", out, "Output PGM")->required();
  augment_cmd->add_option("--blob", blob_out, "Also write the result as an f32 [H, W] tensor blob");

  auto* generate = app.add_subcommand("generate", "Generate a dataset");
  generate->add_option("--episodes", episodes, "Episode count")->required()->check(CLI::PositiveNumber);
  generate->add_option("--seed", seed, "Master seed");
  generate->add_option("--out", dataset_out, "Dataset directory")->capture_default_str();
  generate->add_option("--config", config_path, "Run configuration file");
  generate->add_option("--difficulty", difficulty, "training, easy or hard");
  generate->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  generate->add_flag("--overwrite", overwrite, "Replace an existing dataset");
  generate->add_flag("--quiet", quiet, "No progress output");

  auto* inspect = app.add_subcommand("inspect", "Print manifest statistics and histograms");
  inspect->add_option("dataset,--dataset", dataset, "Dataset directory")->required();
  auto* validate = app.add_subcommand("validate", "Re-run every invariant check on a stored dataset");
  validate->add_option("dataset,--dataset", dataset, "Dataset directory")->required();

  const auto usage = [&](const std::string& message) {
    std::fprintf(stderr, "error: %s\n\n", message.c_str());
    const auto parsed = app.get_subcommands();
    std::cerr << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitUsage;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage(e.what());
  }

  try {
    if (terrain->parsed()) {
      return cmd_terrain(kind, seed, difficulty, config_path, out);
    }
    if (render->parsed()) {
      return cmd_render(kind, seed, difficulty, config_path, pose, raw, out, blob_out);
    }
    if (augment_cmd->parsed()) {
      return cmd_augment(input, frame, seed, config_path, out, blob_out);
    }
    if (generate->parsed()) {
      return cmd_generate(episodes, seed, dataset_out, config_path, difficulty, workers, overwrite, quiet);
    }
    if (inspect->parsed()) {
      return cmd_inspect(dataset);
    }
    if (validate->parsed()) {
      return cmd_validate(dataset);
    }
  } catch (const UsageError& e) {
    return usage(e.what());
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const PathError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitUsage;
}
