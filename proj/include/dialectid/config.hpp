#pragma once

// Pipeline settings read from a `key = value` text file.
//
//   # comment
//   pitch.voicing_threshold = 0.5
//   forest.max_depth = none
//
// Keys are listed in config_keys(); unknown keys are rejected. Command-line
// flags are applied on top of the loaded values by the CLI.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dialectid/acoustics.hpp"
#include "dialectid/eval.hpp"
#include "dialectid/forest.hpp"

namespace dialectid {

struct PipelineConfig {
  AcousticConfig acoustics;
  ForestParams forest;
  std::uint64_t split_seed = kDefaultSplitSeed;
  double test_fraction = 0.2;
  int cv_folds = 5;
  std::string tier_name = "phoneme";
  std::filesystem::path alias_table;  // empty: exact vowel symbols only
  unsigned threads = 0;               // 0 = hardware concurrency
};

// Sets one key from its text value. Throws ConfigError.
void apply_config_value(PipelineConfig& c, std::string_view key, std::string_view value);

// Applies every assignment in `text` on top of `base`, then validates.
// Throws ConfigError with the offending line number.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});

// Range checks mirroring the owning modules' preconditions. Throws ConfigError.
void validate(const PipelineConfig& c);

std::vector<std::string> config_keys();

// Every key with its current value, one `key = value` line each.
std::string format_config(const PipelineConfig& c);

}  // namespace dialectid
