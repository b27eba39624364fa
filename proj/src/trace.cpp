#include "rewardlab/trace.hpp"

#include <algorithm>

#include "rewardlab/error.hpp"

namespace rewardlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFraming: return "MALFORMED_FRAMING";
    case ErrorCode::EmptyTruths: return "EMPTY_TRUTHS";
    case ErrorCode::NonpositiveScale: return "NONPOSITIVE_SCALE";
    case ErrorCode::ToolLogMismatch: return "TOOL_LOG_MISMATCH";
    case ErrorCode::DuplicateDocId: return "DUPLICATE_DOC_ID";
    case ErrorCode::UnknownDocId: return "UNKNOWN_DOC_ID";
    case ErrorCode::EmptyBody: return "EMPTY_BODY";
    case ErrorCode::MalformedCall: return "MALFORMED_CALL";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::DuplicateId: return "DUPLICATE_ID";
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::PolicyError: return "POLICY_ERROR";
  }
  return "UNKNOWN";
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  return "user";
}

std::optional<Role> role_from_string(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  if (name == "tool") return Role::Tool;
  return std::nullopt;
}

std::string_view tag_name(TagKind kind) {
  switch (kind) {
    case TagKind::Think: return "think";
    case TagKind::ToolCall: return "tool_call";
    case TagKind::ToolResponse: return "tool_response";
    case TagKind::Answer: return "answer";
  }
  return "think";
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::UnbalancedTag: return "UNBALANCED_TAG";
    case ViolationCode::CallAndAnswerSameTurn: return "CALL_AND_ANSWER_SAME_TURN";
    case ViolationCode::StrayTopLevelTag: return "STRAY_TOP_LEVEL_TAG";
    case ViolationCode::NestedTag: return "NESTED_TAG";
  }
  return "UNBALANCED_TAG";
}

std::size_t ParsedTurn::count(TagKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(spans.begin(), spans.end(), [kind](const TagSpan& s) { return s.kind == kind; }));
}

bool ParsedTurn::has_violation(ViolationCode code) const {
  return std::find(violations.begin(), violations.end(), code) != violations.end();
}

std::size_t Transcript::assistant_turn_count() const {
  return static_cast<std::size_t>(std::count_if(
      turns.begin(), turns.end(), [](const ParsedTurn& t) { return t.role() == Role::Assistant; }));
}

TagCounts& TagCounts::operator+=(const TagCounts& other) {
  n_answer += other.n_answer;
  n_think += other.n_think;
  n_tool += other.n_tool;
  n_turn += other.n_turn;
  return *this;
}

TagCounts count_tags(const Transcript& transcript) {
  TagCounts counts;
  for (const auto& turn : transcript.turns) {
    if (turn.role() != Role::Assistant) continue;
    ++counts.n_turn;
    counts.n_answer += turn.count(TagKind::Answer);
    counts.n_think += turn.count(TagKind::Think);
    counts.n_tool += turn.count(TagKind::ToolCall);
  }
  return counts;
}

std::optional<std::string> terminal_answer(const Transcript& transcript) {
  const ParsedTurn* last_assistant = nullptr;
  for (auto it = transcript.turns.rbegin(); it != transcript.turns.rend(); ++it) {
    if (it->role() != Role::Assistant) continue;
    if (last_assistant == nullptr) last_assistant = &*it;
    for (auto span = it->spans.rbegin(); span != it->spans.rend(); ++span) {
      if (span->kind == TagKind::Answer) return span->inner_text;
    }
  }
  if (last_assistant == nullptr) return std::nullopt;
  return last_assistant->content();
}

}  // namespace rewardlab
