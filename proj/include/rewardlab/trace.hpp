#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rewardlab {

enum class Role { System, User, Assistant, Tool };

std::string_view to_string(Role role);
std::optional<Role> role_from_string(std::string_view name);

struct Message {
  Role role = Role::User;
  std::string content;

  bool operator==(const Message&) const = default;
};

enum class TagKind { Think, ToolCall, ToolResponse, Answer };

inline constexpr TagKind kAllTagKinds[] = {TagKind::Think, TagKind::ToolCall,
                                           TagKind::ToolResponse, TagKind::Answer};

std::string_view tag_name(TagKind kind);

// One complete, top-level tag pair inside a message. [begin, end) covers the
// opening tag through the closing tag.
struct TagSpan {
  TagKind kind = TagKind::Think;
  std::string inner_text;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const TagSpan&) const = default;
};

enum class ViolationCode {
  UnbalancedTag,
  CallAndAnswerSameTurn,
  StrayTopLevelTag,
  NestedTag,
};

std::string_view to_string(ViolationCode code);

struct ParsedTurn {
  Message message;
  std::vector<TagSpan> spans;
  std::vector<ViolationCode> violations;

  Role role() const { return message.role; }
  const std::string& content() const { return message.content; }
  std::size_t count(TagKind kind) const;
  bool has(TagKind kind) const { return count(kind) > 0; }
  bool has_violation(ViolationCode code) const;

  bool operator==(const ParsedTurn&) const = default;
};

struct TranscriptMetadata {
  std::string episode_id;
  std::uint64_t seed = 0;

  bool operator==(const TranscriptMetadata&) const = default;
};

struct Transcript {
  std::vector<ParsedTurn> turns;
  TranscriptMetadata metadata;

  std::size_t assistant_turn_count() const;

  bool operator==(const Transcript&) const = default;
};

struct TagCounts {
  std::size_t n_answer = 0;
  std::size_t n_think = 0;
  std::size_t n_tool = 0;
  std::size_t n_turn = 0;

  TagCounts& operator+=(const TagCounts& other);
  bool operator==(const TagCounts&) const = default;
};

// Census over assistant turns only; spans in other roles are ignored.
TagCounts count_tags(const Transcript& transcript);

// Inner text of the last answer span of the last assistant turn holding one.
// Falls back to the body of the last assistant turn when no answer span exists
// anywhere, and to nullopt when there are no assistant turns.
std::optional<std::string> terminal_answer(const Transcript& transcript);

}  // namespace rewardlab
