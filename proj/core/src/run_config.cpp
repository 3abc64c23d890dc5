#include "terrasight/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "terrasight/errors.hpp"

namespace terrasight {

namespace {

struct Entry {
  std::string key;
  std::function<std::string(const EpisodeConfig&)> get;
  std::function<bool(EpisodeConfig&, std::string_view)> set;
};

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

using DoubleRef = std::function<double&(EpisodeConfig&)>;
using IntRef = std::function<int&(EpisodeConfig&)>;

Entry real(std::string key, DoubleRef ref) {
  return {std::move(key), [ref](const EpisodeConfig& c) { return format_double(ref(const_cast<EpisodeConfig&>(c))); },
          [ref](EpisodeConfig& c, std::string_view v) { return parse_number(v, ref(c)); }};
}

Entry integer(std::string key, IntRef ref) {
  return {std::move(key), [ref](const EpisodeConfig& c) { return std::to_string(ref(const_cast<EpisodeConfig&>(c))); },
          [ref](EpisodeConfig& c, std::string_view v) { return parse_number(v, ref(c)); }};
}

// Integer-valued bounds stored as an Interval of doubles.
Entry count(std::string key, DoubleRef ref) {
  return {std::move(key),
          [ref](const EpisodeConfig& c) {
            return std::to_string(static_cast<long long>(ref(const_cast<EpisodeConfig&>(c))));
          },
          [ref](EpisodeConfig& c, std::string_view v) {
            long long n = 0;
            if (!parse_number(v, n)) {
              return false;
            }
            ref(c) = static_cast<double>(n);
            return true;
          }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back(integer("episode.max_steps", [](EpisodeConfig& c) -> int& { return c.max_steps; }));
    t.push_back({"episode.difficulty", [](const EpisodeConfig& c) { return std::string(to_string(c.difficulty)); },
                 [](EpisodeConfig& c, std::string_view v) {
                   const auto d = parse_difficulty(v);
                   if (d) {
                     c.difficulty = *d;
                   }
                   return d.has_value();
                 }});
    t.push_back(real("episode.spawn_radius", [](EpisodeConfig& c) -> double& { return c.spawn_radius; }));
    t.push_back(integer("episode.max_attempts", [](EpisodeConfig& c) -> int& { return c.max_attempts; }));
    for (std::size_t k = 0; k < kTerrainKinds.size(); ++k) {
      t.push_back(real("terrain.probability." + std::string(to_string(kTerrainKinds[k])),
                       [k](EpisodeConfig& c) -> double& { return c.terrain_probabilities[k]; }));
    }
    t.push_back(integer("terrain.block_count", [](EpisodeConfig& c) -> int& { return c.terrain.block_count; }));
    t.push_back(integer("terrain.ridge_count", [](EpisodeConfig& c) -> int& { return c.terrain.ridge_count; }));
    t.push_back(integer("terrain.max_placement_attempts",
                        [](EpisodeConfig& c) -> int& { return c.terrain.max_placement_attempts; }));
    t.push_back(real("terrain.ridge_width_min", [](EpisodeConfig& c) -> double& { return c.terrain.ridge_width.lo; }));
    t.push_back(real("terrain.ridge_width_max", [](EpisodeConfig& c) -> double& { return c.terrain.ridge_width.hi; }));
    t.push_back(integer("terrain.hill_wave_count", [](EpisodeConfig& c) -> int& { return c.terrain.hill_wave_count; }));
    t.push_back(real("terrain.hill_wavelength_min",
                     [](EpisodeConfig& c) -> double& { return c.terrain.hill_wavelength.lo; }));
    t.push_back(real("terrain.hill_wavelength_max",
                     [](EpisodeConfig& c) -> double& { return c.terrain.hill_wavelength.hi; }));
    t.push_back(real("terrain.hill_max_amplitude",
                     [](EpisodeConfig& c) -> double& { return c.terrain.hill_max_amplitude; }));
    t.push_back(real("terrain.stair_edge_margin",
                     [](EpisodeConfig& c) -> double& { return c.terrain.stair_edge_margin; }));
    t.push_back(real("terrain.stair_min_landing",
                     [](EpisodeConfig& c) -> double& { return c.terrain.stair_min_landing; }));
    t.push_back(real("terrain.stair_descent_probability",
                     [](EpisodeConfig& c) -> double& { return c.terrain.stair_descent_probability; }));
    t.push_back(real("command.vx_min", [](EpisodeConfig& c) -> double& { return c.commands.vx.lo; }));
    t.push_back(real("command.vx_max", [](EpisodeConfig& c) -> double& { return c.commands.vx.hi; }));
    t.push_back(real("command.vy_min", [](EpisodeConfig& c) -> double& { return c.commands.vy.lo; }));
    t.push_back(real("command.vy_max", [](EpisodeConfig& c) -> double& { return c.commands.vy.hi; }));
    t.push_back(real("command.yaw_rate_min_deg", [](EpisodeConfig& c) -> double& { return c.commands.yaw_rate_deg.lo; }));
    t.push_back(real("command.yaw_rate_max_deg", [](EpisodeConfig& c) -> double& { return c.commands.yaw_rate_deg.hi; }));
    t.push_back(integer("command.switch_min_step", [](EpisodeConfig& c) -> int& { return c.schedule.switch_min_step; }));
    t.push_back(integer("command.switch_max_step", [](EpisodeConfig& c) -> int& { return c.schedule.switch_max_step; }));
    t.push_back(real("walker.nominal_height", [](EpisodeConfig& c) -> double& { return c.walker.nominal_height; }));
    t.push_back(real("walker.height_time_constant",
                     [](EpisodeConfig& c) -> double& { return c.walker.height_time_constant; }));
    t.push_back(real("walker.bob_amplitude", [](EpisodeConfig& c) -> double& { return c.walker.bob_amplitude; }));
    t.push_back(real("walker.swing_clearance", [](EpisodeConfig& c) -> double& { return c.walker.swing_clearance; }));
    t.push_back(real("walker.stance_half_width", [](EpisodeConfig& c) -> double& { return c.walker.stance_half_width; }));
    t.push_back(real("walker.foot_half_length", [](EpisodeConfig& c) -> double& { return c.walker.foot_half_length; }));
    t.push_back(real("walker.foothold_margin", [](EpisodeConfig& c) -> double& { return c.walker.foothold_margin; }));
    t.push_back(real("walker.foothold_search", [](EpisodeConfig& c) -> double& { return c.walker.foothold_search; }));
    t.push_back(real("walker.flat_tolerance", [](EpisodeConfig& c) -> double& { return c.walker.flat_tolerance; }));
    t.push_back(real("walker.pelvis_half_size", [](EpisodeConfig& c) -> double& { return c.walker.pelvis_half_size; }));
    t.push_back(real("walker.body_clearance", [](EpisodeConfig& c) -> double& { return c.walker.body_clearance; }));
    t.push_back(real("gait.nominal_increment", [](EpisodeConfig& c) -> double& { return c.walker.gait.nominal_increment; }));
    t.push_back(real("gait.increment_tolerance",
                     [](EpisodeConfig& c) -> double& { return c.walker.gait.increment_tolerance; }));
    t.push_back(real("gait.max_shift_delta", [](EpisodeConfig& c) -> double& { return c.walker.gait.max_shift_delta; }));
    t.push_back(real("camera.mount_x", [](EpisodeConfig& c) -> double& { return c.camera.mount_offset.x(); }));
    t.push_back(real("camera.mount_y", [](EpisodeConfig& c) -> double& { return c.camera.mount_offset.y(); }));
    t.push_back(real("camera.mount_z", [](EpisodeConfig& c) -> double& { return c.camera.mount_offset.z(); }));
    t.push_back(real("camera.tilt_deg", [](EpisodeConfig& c) -> double& { return c.camera.tilt_deg; }));
    t.push_back(real("camera.hfov_deg", [](EpisodeConfig& c) -> double& { return c.camera.hfov_deg; }));
    t.push_back(real("camera.vfov_deg", [](EpisodeConfig& c) -> double& { return c.camera.vfov_deg; }));
    t.push_back(integer("camera.raw_width", [](EpisodeConfig& c) -> int& { return c.camera.raw_width; }));
    t.push_back(integer("camera.raw_height", [](EpisodeConfig& c) -> int& { return c.camera.raw_height; }));
    t.push_back(integer("camera.out_width", [](EpisodeConfig& c) -> int& { return c.camera.out_width; }));
    t.push_back(integer("camera.out_height", [](EpisodeConfig& c) -> int& { return c.camera.out_height; }));
    t.push_back(real("camera.clip_min", [](EpisodeConfig& c) -> double& { return c.camera.clip_min; }));
    t.push_back(real("camera.clip_max", [](EpisodeConfig& c) -> double& { return c.camera.clip_max; }));
    t.push_back(real("camera_random.position", [](EpisodeConfig& c) -> double& { return c.camera_bounds.position; }));
    t.push_back(real("camera_random.pitch_deg", [](EpisodeConfig& c) -> double& { return c.camera_bounds.pitch_deg; }));
    t.push_back(real("camera_random.fov_deg", [](EpisodeConfig& c) -> double& { return c.camera_bounds.fov_deg; }));
    for (NoiseType type : kNoiseTypes) {
      const auto k = static_cast<std::size_t>(type);
      t.push_back(real("noise.probability." + std::string(to_string(type)),
                       [k](EpisodeConfig& c) -> double& { return c.noise.probability[k]; }));
    }
    t.push_back(real("noise.gaussian_sigma_ratio", [](EpisodeConfig& c) -> double& { return c.noise.gaussian_sigma_ratio; }));
    t.push_back(real("noise.rotation_max_deg", [](EpisodeConfig& c) -> double& { return c.noise.rotation_max_deg; }));
    t.push_back(real("noise.edge_gradient", [](EpisodeConfig& c) -> double& { return c.noise.edge_gradient; }));
    t.push_back(integer("noise.edge_dilation_px", [](EpisodeConfig& c) -> int& { return c.noise.edge_dilation_px; }));
    t.push_back(count("noise.object_count_min", [](EpisodeConfig& c) -> double& { return c.noise.object_count.lo; }));
    t.push_back(count("noise.object_count_max", [](EpisodeConfig& c) -> double& { return c.noise.object_count.hi; }));
    t.push_back(real("noise.object_radius_min_px", [](EpisodeConfig& c) -> double& { return c.noise.object_radius_px.lo; }));
    t.push_back(real("noise.object_radius_max_px", [](EpisodeConfig& c) -> double& { return c.noise.object_radius_px.hi; }));
    t.push_back(count("noise.spot_count_min", [](EpisodeConfig& c) -> double& { return c.noise.spot_count.lo; }));
    t.push_back(count("noise.spot_count_max", [](EpisodeConfig& c) -> double& { return c.noise.spot_count.hi; }));
    t.push_back(real("noise.spot_radius_min_px", [](EpisodeConfig& c) -> double& { return c.noise.spot_radius_px.lo; }));
    t.push_back(real("noise.spot_radius_max_px", [](EpisodeConfig& c) -> double& { return c.noise.spot_radius_px.hi; }));
    t.push_back(real("heightmap_noise.episode_xy", [](EpisodeConfig& c) -> double& { return c.heightmap_noise.episode_xy; }));
    t.push_back(real("heightmap_noise.step_xy", [](EpisodeConfig& c) -> double& { return c.heightmap_noise.step_xy; }));
    t.push_back(real("heightmap_noise.episode_z", [](EpisodeConfig& c) -> double& { return c.heightmap_noise.episode_z; }));
    t.push_back(real("heightmap_noise.step_z", [](EpisodeConfig& c) -> double& { return c.heightmap_noise.step_z; }));
    t.push_back(real("heightmap_noise.delay_min_ms",
                     [](EpisodeConfig& c) -> double& { return c.heightmap_noise.delay_ms.lo; }));
    t.push_back(real("heightmap_noise.delay_max_ms",
                     [](EpisodeConfig& c) -> double& { return c.heightmap_noise.delay_ms.hi; }));
    t.push_back(real("termination.max_tilt_deg", [](EpisodeConfig& c) -> double& { return c.termination.max_tilt_deg; }));
    t.push_back(real("termination.overspeed_margin",
                     [](EpisodeConfig& c) -> double& { return c.termination.overspeed_margin; }));
    t.push_back(real("termination.min_base_height",
                     [](EpisodeConfig& c) -> double& { return c.termination.min_base_height; }));
    t.push_back(real("reward.target_clearance", [](EpisodeConfig& c) -> double& { return c.reward.target_clearance; }));
    return t;
  }();
  return table;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Entry& e : entries()) {
    keys.push_back(e.key);
  }
  return keys;
}

std::string format_config(const EpisodeConfig& config) {
  std::string out;
  for (const Entry& e : entries()) {
    out += e.key + " = " + e.get(config) + "\n";
  }
  return out;
}

EpisodeConfig parse_config(const std::string& text) {
  static const std::unordered_map<std::string, const Entry*> index = [] {
    std::unordered_map<std::string, const Entry*> m;
    for (const Entry& e : entries()) {
      m.emplace(e.key, &e);
    }
    return m;
  }();
  EpisodeConfig config;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected `key = value`");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!it->second->set(config, value)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": bad value '" + std::string(value) + "' for " +
                        key);
    }
  }
  config.validate();
  return config;
}

EpisodeConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace terrasight
