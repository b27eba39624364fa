#include "rewardlab/tag_parser.hpp"

#include <algorithm>
#include <optional>

#include "rewardlab/error.hpp"

namespace rewardlab {
namespace {

struct TagToken {
  TagKind kind;
  bool closing;
  std::size_t length;
};

std::optional<TagToken> match_tag(std::string_view text, std::size_t pos) {
  if (pos >= text.size() || text[pos] != '<') return std::nullopt;
  std::size_t cursor = pos + 1;
  const bool closing = cursor < text.size() && text[cursor] == '/';
  if (closing) ++cursor;
  for (TagKind kind : kAllTagKinds) {
    const auto name = tag_name(kind);
    if (text.compare(cursor, name.size(), name) == 0 && cursor + name.size() < text.size() &&
        text[cursor + name.size()] == '>') {
      return TagToken{kind, closing, cursor + name.size() + 1 - pos};
    }
  }
  return std::nullopt;
}

void add_violation(std::vector<ViolationCode>& violations, ViolationCode code) {
  if (std::find(violations.begin(), violations.end(), code) == violations.end()) {
    violations.push_back(code);
  }
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool all_space(std::string_view text) { return std::all_of(text.begin(), text.end(), is_space); }

std::size_t skip_space(std::string_view text, std::size_t pos) {
  while (pos < text.size() && is_space(text[pos])) ++pos;
  return pos;
}

}  // namespace

ParsedTurn parse_turn(std::string_view content, Role role) {
  ParsedTurn turn;
  turn.message = Message{role, std::string(content)};

  struct Open {
    TagKind kind;
    std::size_t begin;
    std::size_t inner_begin;
  };
  std::optional<Open> open;
  std::vector<TagKind> nested;

  auto close_open = [&](std::size_t closer_begin, std::size_t closer_end) {
    turn.spans.push_back(TagSpan{open->kind,
                                 std::string(content.substr(open->inner_begin, closer_begin - open->inner_begin)),
                                 open->begin, closer_end});
    open.reset();
    nested.clear();
  };

  std::size_t pos = 0;
  while ((pos = content.find('<', pos)) != std::string_view::npos) {
    const auto tag = match_tag(content, pos);
    if (!tag) {
      ++pos;
      continue;
    }
    const std::size_t tag_end = pos + tag->length;
    if (!tag->closing) {
      if (!open) {
        open = Open{tag->kind, pos, tag_end};
      } else {
        nested.push_back(tag->kind);
        add_violation(turn.violations, ViolationCode::NestedTag);
      }
    } else if (!open) {
      add_violation(turn.violations, ViolationCode::UnbalancedTag);
    } else if (!nested.empty() && nested.back() == tag->kind) {
      nested.pop_back();
    } else if (tag->kind == open->kind) {
      if (!nested.empty()) add_violation(turn.violations, ViolationCode::UnbalancedTag);
      close_open(pos, tag_end);
    } else {
      add_violation(turn.violations, ViolationCode::UnbalancedTag);
    }
    pos = tag_end;
  }
  if (open) add_violation(turn.violations, ViolationCode::UnbalancedTag);

  if (turn.has(TagKind::ToolCall) && turn.has(TagKind::Answer)) {
    add_violation(turn.violations, ViolationCode::CallAndAnswerSameTurn);
  }
  return turn;
}

Transcript parse_transcript(std::string_view raw) {
  Transcript transcript;
  std::size_t pos = skip_space(raw, 0);
  while (pos < raw.size()) {
    if (raw.compare(pos, kTurnStart.size(), kTurnStart) != 0) {
      throw Error(ErrorCode::MalformedFraming,
                  "expected turn start marker at byte " + std::to_string(pos));
    }
    pos += kTurnStart.size();
    std::size_t role_end = pos;
    while (role_end < raw.size() && raw[role_end] != '\n' && raw[role_end] != ' ' &&
           raw.compare(role_end, kTurnEnd.size(), kTurnEnd) != 0) {
      ++role_end;
    }
    const auto role_name = raw.substr(pos, role_end - pos);
    const auto role = role_from_string(role_name);
    if (!role) {
      throw Error(ErrorCode::MalformedFraming, "unrecognized role '" + std::string(role_name) + "'");
    }
    if (transcript.turns.empty() && role != Role::System && role != Role::User) {
      throw Error(ErrorCode::MalformedFraming, "first turn must be system or user");
    }
    pos = role_end;
    if (pos < raw.size() && (raw[pos] == '\n' || raw[pos] == ' ')) ++pos;

    const auto end = raw.find(kTurnEnd, pos);
    const auto next_start = raw.find(kTurnStart, pos);
    if (next_start != std::string_view::npos && (end == std::string_view::npos || next_start < end)) {
      throw Error(ErrorCode::MalformedFraming,
                  "turn start marker inside unterminated " + std::string(role_name) + " turn");
    }
    if (end == std::string_view::npos) {
      if (role != Role::Assistant) {
        throw Error(ErrorCode::MalformedFraming, "only a trailing assistant turn may be unterminated");
      }
      transcript.turns.push_back(parse_turn(raw.substr(pos), *role));
      break;
    }
    transcript.turns.push_back(parse_turn(raw.substr(pos, end - pos), *role));
    pos = skip_space(raw, end + kTurnEnd.size());
  }
  return transcript;
}

std::string serialize_transcript(const Transcript& transcript) {
  std::string out;
  for (const auto& turn : transcript.turns) {
    out += kTurnStart;
    out += to_string(turn.role());
    out += '\n';
    out += turn.content();
    out += kTurnEnd;
    out += '\n';
  }
  return out;
}

Transcript make_transcript(const std::vector<Message>& messages) {
  Transcript transcript;
  transcript.turns.reserve(messages.size());
  for (const auto& m : messages) transcript.turns.push_back(parse_turn(m.content, m.role));
  return transcript;
}

bool StructureReport::has(ViolationCode code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [code](const Violation& v) { return v.code == code; });
}

bool is_compliant_turn(const ParsedTurn& turn) {
  if (!turn.violations.empty()) return false;
  const auto& spans = turn.spans;
  const auto is_action = [](const TagSpan& s) {
    return s.kind == TagKind::ToolCall || s.kind == TagKind::Answer;
  };
  if (spans.size() == 1) {
    if (!is_action(spans[0])) return false;
  } else if (spans.size() == 2) {
    if (spans[0].kind != TagKind::Think || !is_action(spans[1])) return false;
  } else {
    return false;
  }
  const std::string_view content = turn.content();
  std::size_t cursor = 0;
  for (const auto& span : spans) {
    if (!all_space(content.substr(cursor, span.begin - cursor))) return false;
    cursor = span.end;
  }
  return all_space(content.substr(cursor));
}

StructureReport validate_structure(const Transcript& transcript) {
  StructureReport report;
  for (std::size_t i = 0; i < transcript.turns.size(); ++i) {
    const auto& turn = transcript.turns[i];
    if (turn.role() != Role::Assistant) continue;
    for (auto code : turn.violations) report.violations.push_back({i, code});
    if (turn.has(TagKind::ToolResponse)) {
      report.violations.push_back({i, ViolationCode::StrayTopLevelTag});
    }
    report.per_turn_compliant.push_back(is_compliant_turn(turn));
  }
  report.balanced = !report.has(ViolationCode::UnbalancedTag);
  return report;
}

}  // namespace rewardlab
