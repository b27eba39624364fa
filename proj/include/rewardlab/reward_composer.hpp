#pragma once

#include <span>
#include <string>

#include "rewardlab/reward_kernels.hpp"
#include "rewardlab/trace.hpp"

namespace rewardlab {

struct Stage1Weights {
  double w_tool = 0.2;
  double w_format = 0.2;
  double w_think = 0.1;
  double w_xml = 0.1;
  double w_vs = 3.0;

  bool operator==(const Stage1Weights&) const = default;
};

struct ComposerConfig {
  Stage1Weights weights;
  double b_floor = -0.5;
  double log_arg_floor = 0.001;
  double format_gate_threshold = 1.0;

  bool operator==(const ComposerConfig&) const = default;
};

inline constexpr double kInvalidXmlPenalty = -0.5;

// The five secondary components that feed the behavioral score.
struct BehaviorComponents {
  double r_tool = 0.0;
  double r_format = 0.0;
  double r_think = 0.0;
  double r_xml = 0.0;
  double r_vs = 0.0;
};

struct RewardBreakdown {
  double r_correct = 0.0;
  double r_xml = 0.0;
  double r_format = 0.0;
  double r_tool = 0.0;
  double r_think = 0.0;
  double r_vs = 0.0;
  double b = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  bool g_format = false;
  bool g_xml = false;

  bool operator==(const RewardBreakdown&) const = default;
};

double behavioral_score(const BehaviorComponents& components, const Stage1Weights& weights,
                        bool xml_valid, const ComposerConfig& cfg = {});

double stage1_reward(double r_correct, double b, const ComposerConfig& cfg = {});

double stage2_reward(double r_correct, double r_format, double r_xml, const ComposerConfig& cfg = {});

// Fills b, r1, r2 and the gates from the component fields already present.
RewardBreakdown compose(RewardBreakdown components, bool xml_valid, const ComposerConfig& cfg);

// Everything the kernels need besides the transcript.
struct KernelConfig {
  NormalizationPolicy normalization;
  ThinkRewardParams think = with_normalizer({});
  ClampPolicy clamp;

  bool operator==(const KernelConfig&) const = default;
};

struct RewardConfig {
  KernelConfig kernels;
  ComposerConfig composer;

  bool operator==(const RewardConfig&) const = default;
};

enum class Stage { One = 1, Two = 2 };

struct Episode {
  Transcript transcript;
  std::vector<std::string> truths;
  ToolCallLog tool_log;
};

// Pairs each assistant tool_call span, in order, with the next tool_response
// span anywhere later in the transcript. A response whose text starts with
// "ERROR:" (after leading whitespace) or a call left unanswered counts as failed.
ToolCallLog infer_tool_log(const Transcript& transcript);

// Both r1 and r2 are always populated; the stage only says which one the
// caller trains on. Throws ToolLogMismatch when the log is not aligned with
// the assistant tool_call spans, EmptyTruths when no truth is given.
RewardBreakdown score_episode(const Episode& episode, Stage stage, const RewardConfig& cfg);

}  // namespace rewardlab
