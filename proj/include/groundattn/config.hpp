#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "groundattn/grounding.hpp"
#include "groundattn/pipeline.hpp"

namespace groundattn {

// Everything a run or an evaluation depends on besides its inputs.
struct GroundingConfig {
  PipelineConfig pipeline;
  BoxMode box_mode = BoxMode::kLargestComponent;
};

// Recognized keys: k, tau, alpha, gamma, anchor_count, strategy,
// similarity_axis, stage_order, seed_source, box_mode, evolve,
// resolutions (comma separated), target_resolution.
// Throws kInvalidArgument for unknown keys or unparsable values.
void apply_setting(GroundingConfig& config, std::string_view key, std::string_view value);

// `key = value` per line; blank lines and lines starting with '#' are skipped.
void apply_config_file(GroundingConfig& config, const std::filesystem::path& path);

std::vector<int> parse_resolution_list(std::string_view text);
std::string format_resolution_list(const std::vector<int>& resolutions);

// Settings in a stable order, one `key = value` line each; feeding the
// output back through apply_config_file reproduces the config.
std::string describe(const GroundingConfig& config);

}  // namespace groundattn
