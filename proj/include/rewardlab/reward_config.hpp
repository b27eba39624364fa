#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "rewardlab/reward_composer.hpp"

namespace rewardlab {

// YAML document with optional sections:
//
//   normalization: {case_fold, collapse_whitespace, strip_edge_punctuation}
//   think:         {loc, scale, shape}
//   clamping:      {xml, visit_search}
//   composer:      {w_tool, w_format, w_think, w_xml, w_vs,
//                   b_floor, log_arg_floor, format_gate_threshold}
//
// Missing keys keep their defaults. The think normalizer is always recomputed.
RewardConfig parse_reward_config(std::string_view yaml_text);
RewardConfig load_reward_config(const std::filesystem::path& path);

void validate(const RewardConfig& cfg);

// Canonical text of the effective configuration.
std::string canonical_config(const RewardConfig& cfg);

// 16 hex digits of FNV-1a over canonical_config().
std::string config_hash(const RewardConfig& cfg);

}  // namespace rewardlab
