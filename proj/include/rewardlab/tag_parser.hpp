#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rewardlab/trace.hpp"

namespace rewardlab {

inline constexpr std::string_view kTurnStart = "<|im_start|>";
inline constexpr std::string_view kTurnEnd = "<|im_end|>";

// Flat scan for the four recognized tag pairs. Anything else in angle
// brackets is inert content. Violations recorded per turn (each code once):
//   UnbalancedTag         opener without closer or closer without opener
//   NestedTag             a recognized opener inside an open span
//   CallAndAnswerSameTurn at least one tool_call and one answer span
ParsedTurn parse_turn(std::string_view content, Role role = Role::Assistant);

// Parses chat framing: "<|im_start|>" role (newline | space) content "<|im_end|>".
// Only whitespace may separate turns. A trailing assistant turn without an end
// marker is kept with its partial content. Throws Error(MalformedFraming).
Transcript parse_transcript(std::string_view raw);

// Turn contents must not contain the framing markers themselves.
std::string serialize_transcript(const Transcript& transcript);

Transcript make_transcript(const std::vector<Message>& messages);

struct Violation {
  std::size_t turn_index = 0;
  ViolationCode code = ViolationCode::UnbalancedTag;

  bool operator==(const Violation&) const = default;
};

struct StructureReport {
  bool balanced = true;
  std::vector<Violation> violations;
  // One flag per assistant turn, in transcript order.
  std::vector<bool> per_turn_compliant;

  bool has(ViolationCode code) const;
};

// Canonical assistant turn shape: optional leading think span, then exactly one
// tool_call or answer span, whitespace only outside spans, no violations.
bool is_compliant_turn(const ParsedTurn& turn);

// Aggregates assistant-turn violations. Adds StrayTopLevelTag for an assistant
// turn that emits a top-level tool_response span (an environment-only tag).
StructureReport validate_structure(const Transcript& transcript);

}  // namespace rewardlab
