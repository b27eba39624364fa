#include "rewardlab/reward_config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include <json.hpp>

#include "rewardlab/error.hpp"

namespace rewardlab {
namespace {

template <typename T>
void read(const YAML::Node& section, const char* key, T& field) {
  if (section && section[key]) field = section[key].as<T>();
}

}  // namespace

RewardConfig parse_reward_config(std::string_view yaml_text) {
  RewardConfig cfg;
  try {
    const YAML::Node root = YAML::Load(std::string(yaml_text));
    if (root && !root.IsNull() && !root.IsMap()) {
      throw Error(ErrorCode::InvalidConfig, "reward config must be a mapping of sections");
    }
    if (root && root.IsMap()) {
      const auto norm = root["normalization"];
      read(norm, "case_fold", cfg.kernels.normalization.case_fold);
      read(norm, "collapse_whitespace", cfg.kernels.normalization.collapse_whitespace);
      read(norm, "strip_edge_punctuation", cfg.kernels.normalization.strip_edge_punctuation);

      const auto think = root["think"];
      read(think, "loc", cfg.kernels.think.loc);
      read(think, "scale", cfg.kernels.think.scale);
      read(think, "shape", cfg.kernels.think.shape);

      const auto clamp = root["clamping"];
      read(clamp, "xml", cfg.kernels.clamp.clamp_xml);
      read(clamp, "visit_search", cfg.kernels.clamp.clamp_visit_search);

      const auto comp = root["composer"];
      read(comp, "w_tool", cfg.composer.weights.w_tool);
      read(comp, "w_format", cfg.composer.weights.w_format);
      read(comp, "w_think", cfg.composer.weights.w_think);
      read(comp, "w_xml", cfg.composer.weights.w_xml);
      read(comp, "w_vs", cfg.composer.weights.w_vs);
      read(comp, "b_floor", cfg.composer.b_floor);
      read(comp, "log_arg_floor", cfg.composer.log_arg_floor);
      read(comp, "format_gate_threshold", cfg.composer.format_gate_threshold);
    }
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  validate(cfg);
  cfg.kernels.think = with_normalizer(cfg.kernels.think);
  return cfg;
}

RewardConfig load_reward_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_reward_config(buffer.str());
}

void validate(const RewardConfig& cfg) {
  const auto& w = cfg.composer.weights;
  for (double weight : {w.w_tool, w.w_format, w.w_think, w.w_xml, w.w_vs}) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw Error(ErrorCode::InvalidConfig, "stage-1 weights must be finite and non-negative");
    }
  }
  if (!(cfg.composer.log_arg_floor > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "log_arg_floor must be > 0");
  }
  if (!std::isfinite(cfg.composer.b_floor) || !std::isfinite(cfg.composer.format_gate_threshold)) {
    throw Error(ErrorCode::InvalidConfig, "b_floor and format_gate_threshold must be finite");
  }
  if (!(cfg.kernels.think.scale > 0.0)) {
    throw Error(ErrorCode::NonpositiveScale, "think scale must be > 0");
  }
}

std::string canonical_config(const RewardConfig& cfg) {
  const auto& k = cfg.kernels;
  const auto& c = cfg.composer;
  nlohmann::json j = {
      {"normalization",
       {{"case_fold", k.normalization.case_fold},
        {"collapse_whitespace", k.normalization.collapse_whitespace},
        {"strip_edge_punctuation", k.normalization.strip_edge_punctuation}}},
      {"think", {{"loc", k.think.loc}, {"scale", k.think.scale}, {"shape", k.think.shape}}},
      {"clamping", {{"xml", k.clamp.clamp_xml}, {"visit_search", k.clamp.clamp_visit_search}}},
      {"composer",
       {{"w_tool", c.weights.w_tool},
        {"w_format", c.weights.w_format},
        {"w_think", c.weights.w_think},
        {"w_xml", c.weights.w_xml},
        {"w_vs", c.weights.w_vs},
        {"b_floor", c.b_floor},
        {"log_arg_floor", c.log_arg_floor},
        {"format_gate_threshold", c.format_gate_threshold}}},
  };
  return j.dump();
}

std::string config_hash(const RewardConfig& cfg) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(cfg)) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(hash));
  return out;
}

}  // namespace rewardlab
