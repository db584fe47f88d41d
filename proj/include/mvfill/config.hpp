#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvfill/experiment.hpp"

namespace mvfill {

// Everything a CLI run needs. Loaded from a "key = value" text file
// ('#' starts a comment); command-line flags override file values.
struct RunConfig {
  std::array<std::filesystem::path, 2> embeddings;
  std::array<std::filesystem::path, 2> scores;
  std::filesystem::path out_dir = "out";
  ExperimentSettings settings;
  int jobs = 1;
  std::optional<int> fold;  // restrict to one fold
};

// Applies one key/value pair. Relative paths are resolved against `base`.
// Throws ConfigError for unknown keys and malformed values.
void apply_setting(RunConfig& config, const std::string& key,
                   const std::string& value,
                   const std::filesystem::path& base = {});

RunConfig load_run_config(const std::filesystem::path& path);

std::vector<std::size_t> parse_k_list(const std::string& text);

// Canonical text form; parsing it back yields the same configuration.
std::string to_text(const RunConfig& config);

// Throws ConfigError if a referenced input file does not exist.
void check_inputs_exist(const RunConfig& config, bool need_scores);

}  // namespace mvfill
