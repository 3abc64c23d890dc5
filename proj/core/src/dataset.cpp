#include "terrasight/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "json.hpp"
#include "terrasight/errors.hpp"
#include "terrasight/run_config.hpp"
#include "terrasight/tensor_blob.hpp"

namespace terrasight {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

std::string episode_dir(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "episodes/%06lld", static_cast<long long>(index));
  return buf;
}

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// ---- JSON views of record metadata --------------------------------------

json vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json interval(const Interval& i) { return json::array({i.lo, i.hi}); }

Interval interval(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json camera_json(const CameraModel& c) {
  return {{"mount_offset", vec3(c.mount_offset)}, {"tilt_deg", c.tilt_deg},   {"hfov_deg", c.hfov_deg},
          {"vfov_deg", c.vfov_deg},               {"raw_width", c.raw_width}, {"raw_height", c.raw_height},
          {"out_width", c.out_width},             {"out_height", c.out_height}, {"clip_min", c.clip_min},
          {"clip_max", c.clip_max}};
}

CameraModel camera_from(const json& j) {
  CameraModel c;
  c.mount_offset = vec3(j.at("mount_offset"));
  c.tilt_deg = j.at("tilt_deg");
  c.hfov_deg = j.at("hfov_deg");
  c.vfov_deg = j.at("vfov_deg");
  c.raw_width = j.at("raw_width");
  c.raw_height = j.at("raw_height");
  c.out_width = j.at("out_width");
  c.out_height = j.at("out_height");
  c.clip_min = j.at("clip_min");
  c.clip_max = j.at("clip_max");
  return c;
}

json noise_json(const NoiseConfig& n) {
  json probability;
  for (NoiseType type : kNoiseTypes) {
    probability[std::string(to_string(type))] = n.probability_of(type);
  }
  return {{"probability", probability},
          {"gaussian_sigma_ratio", n.gaussian_sigma_ratio},
          {"rotation_max_deg", n.rotation_max_deg},
          {"edge_gradient", n.edge_gradient},
          {"edge_dilation_px", n.edge_dilation_px},
          {"object_count", interval(n.object_count)},
          {"object_radius_px", interval(n.object_radius_px)},
          {"spot_count", interval(n.spot_count)},
          {"spot_radius_px", interval(n.spot_radius_px)}};
}

NoiseConfig noise_from(const json& j) {
  NoiseConfig n;
  for (NoiseType type : kNoiseTypes) {
    n.probability[static_cast<std::size_t>(type)] = j.at("probability").at(std::string(to_string(type)));
  }
  n.gaussian_sigma_ratio = j.at("gaussian_sigma_ratio");
  n.rotation_max_deg = j.at("rotation_max_deg");
  n.edge_gradient = j.at("edge_gradient");
  n.edge_dilation_px = j.at("edge_dilation_px");
  n.object_count = interval(j.at("object_count"));
  n.object_radius_px = interval(j.at("object_radius_px"));
  n.spot_count = interval(j.at("spot_count"));
  n.spot_radius_px = interval(j.at("spot_radius_px"));
  return n;
}

json command_json(const Command& c) {
  return {{"mode", std::string(to_string(c.mode))}, {"vx", c.vx}, {"vy", c.vy}, {"yaw_rate_deg", c.yaw_rate_deg}};
}

CommandMode parse_mode(const std::string& name) {
  for (auto mode : {CommandMode::StepInPlace, CommandMode::StepInPlaceTurn, CommandMode::Walk, CommandMode::WalkTurn}) {
    if (to_string(mode) == name) {
      return mode;
    }
  }
  throw FormatError("unknown command mode '" + name + "'");
}

Command command_from(const json& j) {
  return {parse_mode(j.at("mode")), j.at("vx"), j.at("vy"), j.at("yaw_rate_deg")};
}

TerrainKind kind_from(const json& j) {
  const auto kind = parse_terrain_kind(j.get<std::string>());
  if (!kind) {
    throw FormatError("unknown terrain kind " + j.dump());
  }
  return *kind;
}

TerminationReason termination_from(const json& j) {
  const auto reason = parse_termination(j.get<std::string>());
  if (!reason) {
    throw FormatError("unknown termination reason " + j.dump());
  }
  return *reason;
}

json episode_json(const EpisodeRecord& r) {
  json schedule = json::array();
  for (const CommandSwitch& s : r.schedule) {
    schedule.push_back({{"step", s.step}, {"command", command_json(s.command)}});
  }
  const HeightmapNoiseState& h = r.heightmap_noise;
  return {{"seed", r.seed},
          {"terrain_kind", std::string(to_string(r.kind))},
          {"attempts", r.attempts},
          {"spawn", {{"x", r.spawn_x}, {"y", r.spawn_y}, {"yaw", r.spawn_yaw}}},
          {"camera_shift",
           {{"position", vec3(r.camera_shift.position_shift)},
            {"pitch_deg", r.camera_shift.pitch_shift_deg},
            {"fov_deg", r.camera_shift.fov_shift_deg}}},
          {"camera", camera_json(r.camera)},
          {"heightmap_noise",
           {{"episode_shift", json::array({h.episode.dx, h.episode.dy, h.episode.dz})},
            {"step_xy", h.step_xy},
            {"step_z", h.step_z},
            {"delay_ms", h.delay_ms}}},
          {"noise", noise_json(r.noise)},
          {"command_schedule", schedule},
          {"steps", r.steps.size()},
          {"termination", std::string(to_string(r.termination))}};
}

void episode_from(const json& j, EpisodeRecord& r) {
  r.seed = j.at("seed").get<std::uint64_t>();
  r.kind = kind_from(j.at("terrain_kind"));
  r.attempts = j.at("attempts");
  r.spawn_x = j.at("spawn").at("x");
  r.spawn_y = j.at("spawn").at("y");
  r.spawn_yaw = j.at("spawn").at("yaw");
  r.camera_shift.position_shift = vec3(j.at("camera_shift").at("position"));
  r.camera_shift.pitch_shift_deg = j.at("camera_shift").at("pitch_deg");
  r.camera_shift.fov_shift_deg = j.at("camera_shift").at("fov_deg");
  r.camera = camera_from(j.at("camera"));
  const json& h = j.at("heightmap_noise");
  r.heightmap_noise.episode = {h.at("episode_shift").at(0), h.at("episode_shift").at(1), h.at("episode_shift").at(2)};
  r.heightmap_noise.step_xy = h.at("step_xy");
  r.heightmap_noise.step_z = h.at("step_z");
  r.heightmap_noise.delay_ms = h.at("delay_ms");
  r.noise = noise_from(j.at("noise"));
  r.schedule.clear();
  for (const json& s : j.at("command_schedule")) {
    r.schedule.push_back({s.at("step"), command_from(s.at("command"))});
  }
  r.termination = termination_from(j.at("termination"));
}

// ---- Stream packing --------------------------------------------------------

std::array<double, kKinematicsDim> pack_kinematics(const RobotState& s) {
  const BasePose& p = s.pose;
  return {p.position.x(), p.position.y(), p.position.z(), p.yaw, p.pitch, p.roll,
          p.linear_velocity.x(), p.linear_velocity.y(), p.linear_velocity.z(),
          p.angular_velocity.x(), p.angular_velocity.y(), p.angular_velocity.z(),
          s.feet_world[0].x(), s.feet_world[0].y(), s.feet_world[0].z(),
          s.feet_world[1].x(), s.feet_world[1].y(), s.feet_world[1].z(),
          s.clock.phase, s.clock.increment, s.clock.shift_left, s.clock.shift_right,
          static_cast<double>(s.timestamp_ms)};
}

RobotState unpack_kinematics(const double* k) {
  RobotState s;
  s.pose.position = {k[0], k[1], k[2]};
  s.pose.yaw = k[3];
  s.pose.pitch = k[4];
  s.pose.roll = k[5];
  s.pose.linear_velocity = {k[6], k[7], k[8]};
  s.pose.angular_velocity = {k[9], k[10], k[11]};
  s.feet_world[0] = {k[12], k[13], k[14]};
  s.feet_world[1] = {k[15], k[16], k[17]};
  s.clock = {k[18], k[19], k[20], k[21]};
  s.timestamp_ms = static_cast<std::int64_t>(k[22]);
  return s;
}

std::array<double, kFeatureDim> pack_feature(const TerrainFeature& f) {
  return {static_cast<double>(f.shape), f.x, f.y, f.length, f.width, f.height, f.step_length,
          static_cast<double>(f.step_count), static_cast<double>(f.direction), f.has_descent ? 1.0 : 0.0};
}

TerrainFeature unpack_feature(const double* v) {
  TerrainFeature f;
  f.shape = static_cast<FeatureShape>(static_cast<int>(v[0]));
  f.x = v[1];
  f.y = v[2];
  f.length = v[3];
  f.width = v[4];
  f.height = v[5];
  f.step_length = v[6];
  f.step_count = static_cast<int>(v[7]);
  f.direction = static_cast<RunDirection>(static_cast<int>(v[8]));
  f.has_descent = v[9] != 0.0;
  return f;
}

std::uint32_t u32(std::size_t v) { return static_cast<std::uint32_t>(v); }

}  // namespace

TensorBlob feature_blob(const std::vector<TerrainFeature>& features) {
  std::vector<double> values;
  for (const TerrainFeature& f : features) {
    const auto v = pack_feature(f);
    values.insert(values.end(), v.begin(), v.end());
  }
  return TensorBlob::from_f64({u32(features.size()), kFeatureDim}, values);
}

std::vector<TerrainFeature> features_from_blob(const TensorBlob& blob) {
  const std::uint32_t shape[] = {0, kFeatureDim};
  blob.expect(DType::F64, shape, "terrain_features");
  const auto values = blob.to_f64();
  std::vector<TerrainFeature> out;
  for (std::size_t i = 0; i + kFeatureDim <= values.size(); i += kFeatureDim) {
    out.push_back(unpack_feature(values.data() + i));
  }
  return out;
}

TensorBlob hill_blob(const std::vector<HillWave>& hills) {
  std::vector<double> values;
  for (const HillWave& w : hills) {
    values.insert(values.end(), {w.amplitude, w.wavelength, w.direction, w.phase});
  }
  return TensorBlob::from_f64({u32(hills.size()), kHillDim}, values);
}

std::vector<HillWave> hills_from_blob(const TensorBlob& blob) {
  const std::uint32_t shape[] = {0, kHillDim};
  blob.expect(DType::F64, shape, "terrain_hills");
  const auto values = blob.to_f64();
  std::vector<HillWave> out;
  for (std::size_t i = 0; i + kHillDim <= values.size(); i += kHillDim) {
    out.push_back({values[i], values[i + 1], values[i + 2], values[i + 3]});
  }
  return out;
}

std::string encode_pgm(const DepthImage& image, double clip_min, double clip_max) {
  std::string out = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  const double span = clip_max > clip_min ? clip_max - clip_min : 1.0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      double v = 0.0;
      if (image.valid(x, y) && std::isfinite(image.at(x, y))) {
        v = std::clamp((image.at(x, y) - clip_min) / span, 0.0, 1.0) * 255.0;
      }
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
    }
  }
  return out;
}

namespace {

const std::vector<std::string>& stream_names() {
  static const std::vector<std::string> names = {
      "depth",  "depth_valid", "heightmap", "observed_heightmap", "state",         "kinematics", "command",
      "reward", "termination", "noise_flags", "swinging",         "terrain_features", "terrain_hills"};
  return names;
}

std::map<std::string, TensorBlob> pack_streams(const EpisodeRecord& r) {
  const std::size_t t_count = r.steps.size();
  const int w = t_count ? r.steps.front().depth.width() : r.camera.out_width;
  const int h = t_count ? r.steps.front().depth.height() : r.camera.out_height;
  const std::size_t pixels = static_cast<std::size_t>(w) * h;
  const std::size_t mask_bytes = (pixels + 7) / 8;
  std::vector<float> depth;
  std::vector<std::uint8_t> valid(t_count * mask_bytes, 0);
  std::vector<float> label;
  std::vector<float> observed;
  std::vector<float> state;
  std::vector<double> kin;
  std::vector<double> command;
  std::vector<double> reward;
  std::vector<std::uint8_t> termination;
  std::vector<std::uint8_t> flags;
  std::vector<std::uint8_t> swinging;
  depth.reserve(t_count * pixels);
  for (std::size_t t = 0; t < t_count; ++t) {
    const StepRecord& s = r.steps[t];
    if (s.depth.width() != w || s.depth.height() != h) {
      throw DimensionError("depth frames of one episode must share a size");
    }
    depth.insert(depth.end(), s.depth.depth().begin(), s.depth.depth().end());
    const auto mask = s.depth.mask();
    for (std::size_t i = 0; i < pixels; ++i) {
      if (mask[i]) {
        valid[t * mask_bytes + i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
      }
    }
    for (double v : s.label.values()) {
      label.push_back(static_cast<float>(v));
    }
    for (double v : s.observed.values()) {
      observed.push_back(static_cast<float>(v));
    }
    const auto obs = observation_state(s.state);
    state.insert(state.end(), obs.begin(), obs.end());
    const auto k = pack_kinematics(s.state);
    kin.insert(kin.end(), k.begin(), k.end());
    command.insert(command.end(), {static_cast<double>(s.command.mode), s.command.vx, s.command.vy,
                                   s.command.yaw_rate_deg});
    reward.insert(reward.end(), {s.reward.r0, s.reward.r_accel, s.reward.r_collision, s.reward.total});
    termination.push_back(static_cast<std::uint8_t>(s.termination));
    for (bool b : s.noise_applied) {
      flags.push_back(b ? 1 : 0);
    }
    for (bool b : s.swinging) {
      swinging.push_back(b ? 1 : 0);
    }
  }
  const std::uint32_t t32 = u32(t_count);
  const std::uint32_t rows = LocalHeightmap::kRows;
  const std::uint32_t cols = LocalHeightmap::kCols;
  std::map<std::string, TensorBlob> out;
  out["depth"] = TensorBlob::from_f32({t32, u32(h), u32(w)}, depth);
  out["depth_valid"] = TensorBlob::from_u8({t32, u32(mask_bytes)}, valid);
  out["heightmap"] = TensorBlob::from_f32({t32, rows, cols}, label);
  out["observed_heightmap"] = TensorBlob::from_f32({t32, rows, cols}, observed);
  out["state"] = TensorBlob::from_f32({t32, kStateDim}, state);
  out["kinematics"] = TensorBlob::from_f64({t32, kKinematicsDim}, kin);
  out["command"] = TensorBlob::from_f64({t32, kCommandDim}, command);
  out["reward"] = TensorBlob::from_f64({t32, kRewardDim}, reward);
  out["termination"] = TensorBlob::from_u8({t32}, termination);
  out["noise_flags"] = TensorBlob::from_u8({t32, 5}, flags);
  out["swinging"] = TensorBlob::from_u8({t32, 2}, swinging);
  out["terrain_features"] = feature_blob(r.features);
  out["terrain_hills"] = hill_blob(r.hills);
  return out;
}

// Reads one file listed in the manifest and verifies its checksum.
std::vector<std::uint8_t> read_checked(const ManifestEntry& entry, const std::string& name, const fs::path& root) {
  const auto it = entry.files.find(name);
  if (it == entry.files.end()) {
    throw PathError("episode " + std::to_string(entry.index) + " lists no '" + name + "' file", entry.index);
  }
  std::vector<std::uint8_t> bytes = read_file(root / it->second.path, entry.index);
  const std::uint64_t sum = fnv1a64(bytes);
  if (sum != it->second.checksum) {
    throw ChecksumError("checksum mismatch in " + it->second.path + " (episode " + std::to_string(entry.index) +
                        "): expected " + hex64(it->second.checksum) + ", found " + hex64(sum));
  }
  return bytes;
}

TensorBlob read_blob(const ManifestEntry& entry, const std::string& name, const fs::path& root, DType dtype,
                     std::vector<std::uint32_t> shape) {
  TensorBlob blob = TensorBlob::decode(read_checked(entry, name, root));
  blob.expect(dtype, shape, entry.files.at(name).path);
  return blob;
}

json entry_json(const ManifestEntry& e) {
  json files = json::object();
  for (const auto& [name, ref] : e.files) {
    files[name] = {{"path", ref.path}, {"fnv1a64", hex64(ref.checksum)}, {"bytes", ref.bytes}};
  }
  return {{"index", e.index},
          {"episode_seed", e.episode_seed},
          {"terrain_kind", std::string(to_string(e.kind))},
          {"steps", e.steps},
          {"termination", std::string(to_string(e.termination))},
          {"dir", e.dir},
          {"files", files}};
}

ManifestEntry entry_from(const json& j) {
  ManifestEntry e;
  e.index = j.at("index");
  e.episode_seed = j.at("episode_seed").get<std::uint64_t>();
  e.kind = kind_from(j.at("terrain_kind"));
  e.steps = j.at("steps");
  e.termination = termination_from(j.at("termination"));
  e.dir = j.at("dir");
  for (const auto& [name, f] : j.at("files").items()) {
    e.files[name] = {f.at("path"), parse_hex64(f.at("fnv1a64")), f.at("bytes").get<std::uint64_t>()};
  }
  return e;
}

}  // namespace

ManifestEntry write_episode(const EpisodeRecord& record, std::int64_t index, std::uint64_t episode_seed,
                            const fs::path& root) {
  ManifestEntry entry;
  entry.index = index;
  entry.episode_seed = episode_seed;
  entry.kind = record.kind;
  entry.steps = static_cast<int>(record.steps.size());
  entry.termination = record.termination;
  entry.dir = episode_dir(index);
  std::error_code ec;
  fs::create_directories(root / entry.dir, ec);
  if (ec) {
    throw IoError("cannot create " + (root / entry.dir).string() + ": " + ec.message());
  }
  for (const auto& [name, blob] : pack_streams(record)) {
    const std::vector<std::uint8_t> bytes = blob.encode();
    const std::string rel = entry.dir + "/" + name + ".tblob";
    write_file_atomic(root / rel, bytes);
    entry.files[name] = {rel, fnv1a64(bytes), bytes.size()};
  }
  const std::string meta = episode_json(record).dump(2) + "\n";
  const std::string rel = entry.dir + "/episode.json";
  write_text_atomic(root / rel, meta);
  entry.files["episode"] = {rel, fnv1a64(as_bytes(meta)), meta.size()};
  return entry;
}

EpisodeRecord read_episode(const ManifestEntry& entry, const fs::path& root) {
  EpisodeRecord r;
  {
    const std::vector<std::uint8_t> meta = read_checked(entry, "episode", root);
    try {
      episode_from(json::parse(meta.begin(), meta.end()), r);
    } catch (const json::exception& e) {
      throw FormatError("bad episode metadata (episode " + std::to_string(entry.index) + "): " + e.what());
    }
  }
  const std::uint32_t t = u32(entry.steps);
  const std::uint32_t w = u32(r.camera.out_width);
  const std::uint32_t h = u32(r.camera.out_height);
  const std::uint32_t mask_bytes = (w * h + 7) / 8;
  const std::uint32_t rows = LocalHeightmap::kRows;
  const std::uint32_t cols = LocalHeightmap::kCols;
  const auto depth = read_blob(entry, "depth", root, DType::F32, {t, h, w}).to_f32();
  const auto valid = read_blob(entry, "depth_valid", root, DType::U8, {t, mask_bytes}).to_u8();
  const auto label = read_blob(entry, "heightmap", root, DType::F32, {t, rows, cols}).to_f32();
  const auto observed = read_blob(entry, "observed_heightmap", root, DType::F32, {t, rows, cols}).to_f32();
  read_blob(entry, "state", root, DType::F32, {t, kStateDim});
  const auto kin = read_blob(entry, "kinematics", root, DType::F64, {t, kKinematicsDim}).to_f64();
  const auto command = read_blob(entry, "command", root, DType::F64, {t, kCommandDim}).to_f64();
  const auto reward = read_blob(entry, "reward", root, DType::F64, {t, kRewardDim}).to_f64();
  const auto termination = read_blob(entry, "termination", root, DType::U8, {t}).to_u8();
  const auto flags = read_blob(entry, "noise_flags", root, DType::U8, {t, 5}).to_u8();
  const auto swinging = read_blob(entry, "swinging", root, DType::U8, {t, 2}).to_u8();
  r.features = features_from_blob(read_blob(entry, "terrain_features", root, DType::F64, {0, kFeatureDim}));
  r.hills = hills_from_blob(read_blob(entry, "terrain_hills", root, DType::F64, {0, kHillDim}));
  const std::size_t pixels = static_cast<std::size_t>(w) * h;
  r.steps.resize(t);
  for (std::size_t k = 0; k < t; ++k) {
    StepRecord& s = r.steps[k];
    s.state = unpack_kinematics(kin.data() + k * kKinematicsDim);
    s.depth = DepthImage(static_cast<int>(w), static_cast<int>(h), 0.0f, false);
    std::copy(depth.begin() + k * pixels, depth.begin() + (k + 1) * pixels, s.depth.depth().begin());
    auto mask = s.depth.mask();
    for (std::size_t i = 0; i < pixels; ++i) {
      mask[i] = (valid[k * mask_bytes + i / 8] >> (i % 8)) & 1u;
    }
    for (int i = 0; i < LocalHeightmap::kSize; ++i) {
      s.label.values()[i] = label[k * LocalHeightmap::kSize + i];
      s.observed.values()[i] = observed[k * LocalHeightmap::kSize + i];
    }
    const double* c = command.data() + k * kCommandDim;
    s.command = {static_cast<CommandMode>(static_cast<int>(c[0])), c[1], c[2], c[3]};
    const double* rw = reward.data() + k * kRewardDim;
    s.reward = {rw[0], rw[1], rw[2], rw[3]};
    if (termination[k] > static_cast<std::uint8_t>(TerminationReason::BodyCollision)) {
      throw FormatError("bad termination code in episode " + std::to_string(entry.index));
    }
    s.termination = static_cast<TerminationReason>(termination[k]);
    for (int i = 0; i < 5; ++i) {
      s.noise_applied[i] = flags[k * 5 + i] != 0;
    }
    s.swinging = {swinging[k * 2] != 0, swinging[k * 2 + 1] != 0};
  }
  return r;
}

Manifest read_manifest(const fs::path& root) {
  const std::vector<std::uint8_t> bytes = read_file(root / "manifest.json");
  Manifest m;
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest.json is not valid JSON: ") + e.what());
  }
  try {
    m.format_version = j.at("format_version");
    if (m.format_version != kDatasetFormatVersion) {
      throw VersionError("dataset format version " + std::to_string(m.format_version) + ", expected " +
                         std::to_string(kDatasetFormatVersion));
    }
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.config_checksum = parse_hex64(j.at("config_fnv1a64"));
    for (const json& e : j.at("episodes")) {
      m.episodes.push_back(entry_from(e));
    }
    if (m.episodes.size() != j.at("episode_count").get<std::size_t>()) {
      throw FormatError("manifest episode_count disagrees with its entries");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest.json: ") + e.what());
  }
  const std::vector<std::uint8_t> config = read_file(root / "config.txt");
  if (fnv1a64(config) != m.config_checksum) {
    throw ChecksumError("checksum mismatch in config.txt");
  }
  m.config = parse_config(std::string(config.begin(), config.end()));
  return m;
}

GenerateStats generate_dataset(const fs::path& root, const GenerateOptions& options) {
  if (options.episodes < 1) {
    throw ConfigError("episode count must be at least 1");
  }
  if (options.workers < 1) {
    throw ConfigError("worker count must be at least 1");
  }
  options.config.validate();
  std::error_code ec;
  if (fs::exists(root / "manifest.json")) {
    if (!options.overwrite) {
      throw IoError(root.string() + " already holds a dataset");
    }
    fs::remove(root / "manifest.json", ec);
    fs::remove(root / "stats.json", ec);
    fs::remove_all(root / "episodes", ec);
  }
  fs::create_directories(root, ec);
  if (ec) {
    throw IoError("cannot create " + root.string() + ": " + ec.message());
  }
  const std::string config_text = format_config(options.config);
  write_text_atomic(root / "config.txt", config_text);

  const auto start = std::chrono::steady_clock::now();
  struct Done {
    std::int64_t index;
    ManifestEntry entry;
    int attempts;
    std::exception_ptr error;
  };
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<Done> queue;
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> stop{false};
  int finished = 0;
  const std::int64_t total = options.episodes;
  auto worker = [&] {
    for (;;) {
      const std::int64_t index = next.fetch_add(1);
      if (index >= total || stop.load()) {
        {
          std::lock_guard lock(mutex);
          ++finished;
        }
        ready.notify_one();
        return;
      }
      Done done{index, {}, 0, nullptr};
      try {
        const std::uint64_t seed = episode_seed(options.seed, static_cast<std::uint64_t>(index));
        const EpisodeRecord rec = generate_episode(seed, options.config);
        done.attempts = rec.attempts;
        done.entry = write_episode(rec, index, seed, root);
      } catch (...) {
        done.error = std::current_exception();
        stop.store(true);
      }
      {
        std::lock_guard lock(mutex);
        queue.push_back(std::move(done));
      }
      ready.notify_one();
    }
  };
  const int workers = static_cast<int>(std::min<std::int64_t>(options.workers, total));
  std::vector<std::thread> threads;
  for (int k = 0; k < workers; ++k) {
    threads.emplace_back(worker);
  }

  // Single owner of the manifest: collects entries in index order.
  std::vector<std::optional<ManifestEntry>> entries(static_cast<std::size_t>(total));
  GenerateStats stats;
  stats.workers = workers;
  std::exception_ptr first_error;
  std::int64_t received = 0;
  while (received < total) {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return !queue.empty() || finished == workers; });
    if (queue.empty()) {
      break;
    }
    Done done = std::move(queue.front());
    queue.pop_front();
    lock.unlock();
    ++received;
    if (done.error) {
      if (!first_error) {
        first_error = done.error;
      }
      break;
    }
    stats.frames += done.entry.steps;
    stats.retries += done.attempts - 1;
    entries[static_cast<std::size_t>(done.index)] = std::move(done.entry);
    if (options.progress) {
      options.progress(received, total);
    }
  }
  for (std::thread& t : threads) {
    t.join();
  }
  if (!first_error) {
    // Errors that arrived after the last successful entry.
    for (const Done& d : queue) {
      if (d.error) {
        first_error = d.error;
        break;
      }
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
  stats.episodes = total;
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest;
  manifest["format"] = "terrasight-dataset";
  manifest["format_version"] = kDatasetFormatVersion;
  manifest["master_seed"] = options.seed;
  manifest["episode_count"] = total;
  manifest["difficulty"] = std::string(to_string(options.config.difficulty));
  json distribution;
  for (std::size_t k = 0; k < kTerrainKinds.size(); ++k) {
    distribution[std::string(to_string(kTerrainKinds[k]))] = options.config.terrain_probabilities[k];
  }
  manifest["terrain_distribution"] = distribution;
  manifest["noise_config"] = noise_json(options.config.noise);
  manifest["config_file"] = "config.txt";
  manifest["config_fnv1a64"] = hex64(fnv1a64(as_bytes(config_text)));
  manifest["episodes"] = json::array();
  for (const auto& e : entries) {
    manifest["episodes"].push_back(entry_json(*e));
  }
  write_text_atomic(root / "manifest.json", manifest.dump(2) + "\n");

  const json stats_json = {{"episodes", stats.episodes},
                           {"frames", stats.frames},
                           {"retries", stats.retries},
                           {"seconds", stats.seconds},
                           {"workers", stats.workers},
                           {"frames_per_second", stats.frames_per_second()},
                           {"episodes_per_second", stats.episodes_per_second()}};
  write_text_atomic(root / "stats.json", stats_json.dump(2) + "\n");
  return stats;
}

ValidationReport validate_dataset(const fs::path& root) {
  ValidationReport report;
  constexpr std::size_t kMaxErrors = 50;
  auto fail = [&](std::string msg) {
    if (report.errors.size() < kMaxErrors) {
      report.errors.push_back(std::move(msg));
    }
  };
  Manifest manifest;
  try {
    manifest = read_manifest(root);
  } catch (const Error& e) {
    fail(e.what());
    return report;
  }
  const EpisodeConfig& config = manifest.config;
  for (std::size_t n = 0; n < manifest.episodes.size(); ++n) {
    const ManifestEntry& entry = manifest.episodes[n];
    const std::string tag = "episode " + std::to_string(entry.index) + ": ";
    if (entry.index != static_cast<std::int64_t>(n)) {
      fail(tag + "manifest is not ordered by index");
    }
    if (entry.episode_seed != episode_seed(manifest.master_seed, static_cast<std::uint64_t>(entry.index))) {
      fail(tag + "episode seed does not derive from the master seed");
    }
    EpisodeRecord rec;
    try {
      rec = read_episode(entry, root);
    } catch (const Error& e) {
      fail(e.what());
      continue;
    }
    ++report.episodes;
    report.frames += static_cast<std::int64_t>(rec.steps.size());
    if (rec.kind != entry.kind || rec.kind != episode_terrain_kind(entry.episode_seed, config)) {
      fail(tag + "terrain kind does not match its seed");
    }
    if (rec.attempts < 1 || rec.seed != attempt_seed(entry.episode_seed, rec.attempts - 1)) {
      fail(tag + "attempt seed does not derive from the episode seed");
    }
    try {
      const HeightField regenerated = episode_terrain(rec.kind, rec.seed, config);
      if (regenerated.features() != rec.features || regenerated.hills() != rec.hills) {
        fail(tag + "stored terrain differs from the terrain regenerated from its seed");
      }
    } catch (const Error& e) {
      fail(tag + "terrain regeneration failed: " + e.what());
    }
    if (rec.steps.empty() || static_cast<int>(rec.steps.size()) > config.max_steps) {
      fail(tag + "step count outside [1, max_steps]");
      continue;
    }
    const CameraRandomizationBounds& cb = config.camera_bounds;
    const CameraRandomization& shift = rec.camera_shift;
    if (shift.position_shift.cwiseAbs().maxCoeff() > cb.position || std::abs(shift.pitch_shift_deg) > cb.pitch_deg ||
        std::abs(shift.fov_shift_deg) > cb.fov_deg) {
      fail(tag + "camera randomization outside its bounds");
    }
    if (apply_camera_randomization(config.camera, shift) != rec.camera) {
      fail(tag + "camera model differs from the randomized configuration");
    }
    if (!config.heightmap_noise.delay_ms.contains(rec.heightmap_noise.delay_ms)) {
      fail(tag + "heightmap delay outside its range");
    }
    const HeightField field(rec.kind, rec.features, rec.hills);
    for (std::size_t t = 0; t < rec.steps.size(); ++t) {
      const StepRecord& s = rec.steps[t];
      const std::string at = tag + "step " + std::to_string(t) + ": ";
      const RobotState& robot = s.state;
      try {
        if (round_to_float(extract_heightmap(field, robot.pose)) != s.label) {
          ++report.label_mismatches;
          fail(at + "ground-truth heightmap mismatch");
        }
        if (robot.timestamp_ms != static_cast<std::int64_t>((t + 1) * kControlPeriodMs)) {
          fail(at + "timestamp not on the 20 ms grid");
        }
        if (s.command != command_at(rec.schedule, static_cast<int>(t))) {
          fail(at + "command differs from the schedule");
        }
        for (int leg = 0; leg < 2; ++leg) {
          const Eigen::Vector3d& foot = robot.feet_world[leg];
          if ((foot - robot.pose.position).norm() > 1.2) {
            fail(at + "foot beyond kinematic reach");
          }
          if (s.swinging[leg] && foot.z() < field.height_at(foot.x(), foot.y()) - 1e-9) {
            fail(at + "swing foot below the terrain");
          }
        }
        const float lo = static_cast<float>(rec.camera.clip_min);
        const float hi = static_cast<float>(rec.camera.clip_max);
        for (float v : s.depth.depth()) {
          if (!(v >= lo && v <= hi)) {
            fail(at + "depth outside the clip range");
            break;
          }
        }
        const RewardBreakdown& r = s.reward;
        if (r.total != r.r0 + r.r_accel + r.r_collision || !(r.r0 >= 0.0 && r.r0 <= 1.0) ||
            !(r.r_accel >= 0.0 && r.r_accel <= kAccelRewardScale) ||
            (r.r_collision != 0.0 && r.r_collision != kCollisionPenalty)) {
          fail(at + "reward components inconsistent");
        }
        const bool body_contact = pelvis_terrain_height(field, robot.pose, config.walker) >
                                  robot.pose.position.z() - config.walker.body_clearance;
        const TerminationReason expected =
            check_termination(robot.pose, s.command, field, body_contact, config.termination);
        if (expected != s.termination) {
          fail(at + "termination reason does not re-derive");
        }
        const bool last = t + 1 == rec.steps.size();
        if (!last && s.termination != TerminationReason::None) {
          fail(at + "stream continues past a termination");
        }
        if (last && s.termination != rec.termination) {
          fail(at + "episode termination disagrees with its last step");
        }
        if (last && s.termination == TerminationReason::None && static_cast<int>(rec.steps.size()) != config.max_steps) {
          fail(at + "episode ends early without a termination");
        }
      } catch (const Error& e) {
        fail(at + e.what());
      }
    }
  }
  return report;
}

DatasetSummary summarize_dataset(const fs::path& root) {
  const Manifest manifest = read_manifest(root);
  DatasetSummary summary;
  summary.episodes = static_cast<std::int64_t>(manifest.episodes.size());
  for (const ManifestEntry& e : manifest.episodes) {
    summary.frames += e.steps;
    ++summary.kind_counts[static_cast<std::size_t>(e.kind)];
    ++summary.termination_counts[static_cast<std::size_t>(e.termination)];
    for (const auto& [name, ref] : e.files) {
      summary.bytes += ref.bytes;
    }
  }
  std::ifstream in(root / "stats.json");
  if (in) {
    try {
      const json stats = json::parse(in);
      summary.frames_per_second = stats.at("frames_per_second");
      summary.episodes_per_second = stats.at("episodes_per_second");
      summary.seconds = stats.at("seconds");
      summary.workers = stats.at("workers");
    } catch (const json::exception&) {
      // Timing is informational only.
    }
  }
  return summary;
}

bool within_multinomial_bounds(const std::array<std::int64_t, 5>& counts, const std::array<double, 5>& probabilities,
                               double z) {
  std::int64_t n = 0;
  for (std::int64_t c : counts) {
    n += c;
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double mean = n * probabilities[k];
    const double sd = std::sqrt(n * probabilities[k] * (1.0 - probabilities[k]));
    if (std::abs(static_cast<double>(counts[k]) - mean) > z * sd + 0.5) {
      return false;
    }
  }
  return true;
}

}  // namespace terrasight
