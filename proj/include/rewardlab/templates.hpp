#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rewardlab {

struct ToolPair {
  std::string call_text;
  std::string response_text;

  bool operator==(const ToolPair&) const = default;
};

struct EpisodeContext {
  std::string system_prompt;
  std::string question;
  std::vector<ToolPair> tool_pairs;
};

enum class TemplateId {
  T1_BASELINE,
  T2_THINK_OPEN,
  T3_ALL_INSIDE_THINK,
  T4_CALLS_OUT_RESPONSES_IN,
  T5_SEQUENCED_THINK,
};

inline constexpr std::array kAllTemplates = {
    TemplateId::T1_BASELINE, TemplateId::T2_THINK_OPEN, TemplateId::T3_ALL_INSIDE_THINK,
    TemplateId::T4_CALLS_OUT_RESPONSES_IN, TemplateId::T5_SEQUENCED_THINK};

// "T1".."T5" or the full enumerator name.
std::optional<TemplateId> template_from_string(std::string_view name);
std::string_view short_name(TemplateId id);
std::string_view long_name(TemplateId id);

struct TemplateDescriptor {
  TemplateId id;
  std::string_view summary;
  std::string_view observation;  // recorded dry-run observation, "-" if none
  double recorded_accuracy;      // percent; metadata only
};

std::vector<TemplateDescriptor> list_templates();

// Lines joined by '\n' with no trailing newline.
std::string render(TemplateId id, const EpisodeContext& ctx);

}  // namespace rewardlab
