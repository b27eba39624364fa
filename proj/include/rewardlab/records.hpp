#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rewardlab/reward_composer.hpp"
#include "rewardlab/rollout.hpp"
#include "rewardlab/search_sim.hpp"
#include "rewardlab/templates.hpp"
#include "rewardlab/trace.hpp"

// JSON wire and file shapes. Every from_json throws nlohmann::json exceptions
// on shape errors; callers translate them.
namespace rewardlab {

using nlohmann::json;

json to_json(const Message& message);
Message message_from_json(const json& j);

json turns_to_json(const Transcript& transcript);
Transcript transcript_from_turns(const json& turns);

json to_json(const ToolCallLog& log);
ToolCallLog tool_log_from_json(const json& j);

json to_json(const RewardBreakdown& breakdown);
RewardBreakdown breakdown_from_json(const json& j);

json to_json(const EpisodeResult& result);

json to_json(const Document& doc);
Document document_from_json(const json& j);

json to_json(const QAPair& qa);
QAPair qa_from_json(const json& j);

json to_json(const EpisodeLimits& limits);
EpisodeLimits limits_from_json(const json& j, EpisodeLimits base = {});

EpisodeContext context_from_json(const json& j);

// Partial override: only keys present in j replace fields of base.
ComposerConfig composer_from_json(const json& j, ComposerConfig base);
json to_json(const ComposerConfig& cfg);

// Line of an episodes file: {id, question, answers, turns, tool_log?}.
struct EpisodeRecord {
  std::string id;
  std::string question;
  std::vector<std::string> answers;
  Transcript transcript;
  std::optional<ToolCallLog> tool_log;
};

EpisodeRecord episode_record_from_json(const json& j);

// Reads a line-delimited file; blank lines are skipped. Throws ParseError with
// the 1-based line number.
std::vector<json> read_json_lines(const std::filesystem::path& path);

std::vector<EpisodeRecord> load_episodes(const std::filesystem::path& path);

// Flat breakdown record, one per line in batch output.
json breakdown_record(const RewardBreakdown& breakdown, const std::string& config_hash,
                      const std::string& id = {});

}  // namespace rewardlab
