#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "terrasight/episode.hpp"

namespace terrasight {

/// Every configuration key in file order.
std::vector<std::string> config_keys();

/// Renders the full configuration as `key = value` lines. Doubles use the
/// shortest representation that parses back to the same value.
std::string format_config(const EpisodeConfig& config);

/// Parses `key = value` lines (`#` starts a comment) over the defaults.
/// Unknown keys, malformed values and invalid results throw ConfigError
/// naming the line.
EpisodeConfig parse_config(const std::string& text);

/// Reads and parses a configuration file; a missing file is a ConfigError.
EpisodeConfig load_config(const std::filesystem::path& path);

}  // namespace terrasight
