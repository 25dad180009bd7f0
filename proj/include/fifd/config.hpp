#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fifd/simharness.hpp"

namespace fifd {

// Config text: `key = value` lines, `#` comments, and an optional `[grid]`
// section whose keys list comma-separated values. Sections other than
// top-level and [grid] are ignored (the manifest stores seeds there).
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

struct ExperimentConfig {
  SimConfig base;
  std::vector<GridAxis> grid;
};

struct GridCell {
  std::string id;  // e.g. "s40_sigma1", or "base" without a grid
  SimConfig config;
};

ExperimentConfig parse_experiment(std::string_view text);
ExperimentConfig load_experiment(const std::string& path);

// Applies `key=value`; `grid.key=v1,v2` sets a grid axis. Throws ConfigError.
void apply_override(ExperimentConfig& cfg, std::string_view assignment);

// Sets one top-level key on a SimConfig.
void set_key(SimConfig& cfg, std::string_view key, std::string_view value);

// Canonical key/value echo; parse_experiment(to_config_text(c)) reproduces c.
std::vector<std::pair<std::string, std::string>> to_key_values(const SimConfig& cfg);
std::string to_config_text(const ExperimentConfig& cfg);

std::vector<GridCell> expand_grid(const ExperimentConfig& cfg);

}  // namespace fifd
