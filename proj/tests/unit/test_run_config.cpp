#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "terrasight/errors.hpp"
#include "terrasight/run_config.hpp"

namespace terrasight {
namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(RunConfig, DefaultsRoundTrip) {
  const EpisodeConfig defaults;
  const std::string text = format_config(defaults);
  EXPECT_EQ(format_config(parse_config(text)), text);
  EXPECT_EQ(format_config(parse_config("")), text);
}

TEST(RunConfig, EveryKeyIsRendered) {
  const std::string text = format_config(EpisodeConfig{});
  for (const std::string& key : config_keys()) {
    EXPECT_NE(text.find(key + " = "), std::string::npos) << key;
  }
}

TEST(RunConfig, OverridesAndComments) {
  const EpisodeConfig c = parse_config(
      "# a comment\n"
      "episode.max_steps = 120   # trailing\n"
      "\n"
      "episode.difficulty = hard\n"
      "episode.spawn_radius=0.25\n");
  EXPECT_EQ(c.max_steps, 120);
  EXPECT_EQ(c.difficulty, Difficulty::EvalHard);
  EXPECT_EQ(c.spawn_radius, 0.25);
  const EpisodeConfig back = parse_config(format_config(c));
  EXPECT_EQ(back.max_steps, 120);
  EXPECT_EQ(back.spawn_radius, 0.25);
}

TEST(RunConfig, ErrorsNameTheLine) {
  EXPECT_NE(error_of("episode.max_steps = 10\nnot a pair\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("episode.nope = 1\n").find("unknown key"), std::string::npos);
  EXPECT_NE(error_of("episode.max_steps = ten\n").find("bad value"), std::string::npos);
  EXPECT_NE(error_of("episode.difficulty = extreme\n").find("line 1"), std::string::npos);
  // Parses but fails validation.
  EXPECT_FALSE(error_of("episode.max_steps = 0\n").empty());
}

TEST(RunConfig, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/terrasight.cfg"), ConfigError);
}

TEST(RunConfig, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "terrasight_config_test.cfg";
  {
    std::ofstream out(path);
    out << "episode.max_steps = 33\n";
  }
  EXPECT_EQ(load_config(path).max_steps, 33);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace terrasight
