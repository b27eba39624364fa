#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rewardlab/reward_composer.hpp"
#include "rewardlab/search_sim.hpp"
#include "rewardlab/trace.hpp"

namespace rewardlab {

struct QAPair {
  std::string id;
  std::string question;
  std::vector<std::string> answers;

  bool operator==(const QAPair&) const = default;
};

// Throws ParseError (message carries the line number) and DuplicateId.
std::vector<QAPair> load_qa_dataset(const std::filesystem::path& path);

enum class PolicyFailure { None, Transport, Rejected, Exhausted };

struct PolicyReply {
  PolicyFailure failure = PolicyFailure::None;
  std::string content;
  std::string detail;

  static PolicyReply ok(std::string content) { return {PolicyFailure::None, std::move(content), {}}; }
  static PolicyReply fail(PolicyFailure failure, std::string detail) {
    return {failure, {}, std::move(detail)};
  }
};

// Text in (the serialized conversation so far), text out (the next assistant
// message). Each episode gets a fresh policy from a PolicyFactory.
using Policy = std::function<PolicyReply(const std::string& conversation)>;
using PolicyFactory = std::function<Policy(const QAPair& qa)>;

// Replays the script one entry per request; running past the end is a failure.
Policy scripted_policy(std::vector<std::string> script);

// POSTs the conversation as text/plain and takes the response body as the
// assistant message. Connection failures are PolicyFailure::Transport.
Policy http_policy(const std::string& url, double timeout_seconds = 30.0);

struct EpisodeLimits {
  std::size_t max_assistant_turns = 10;
  std::size_t max_tool_calls = 16;
  std::size_t max_total_bytes = 256 * 1024;

  bool operator==(const EpisodeLimits&) const = default;
};

enum class Termination { Answered, TurnLimit, ToolLimit, ByteLimit, PolicyError };

std::string_view to_string(Termination termination);

struct EpisodeResult {
  std::string qa_id;
  Transcript transcript;
  ToolCallLog tool_log;
  RewardBreakdown breakdown;
  Termination termination = Termination::Answered;
  PolicyFailure policy_failure = PolicyFailure::None;
  std::string policy_detail;

  bool operator==(const EpisodeResult&) const = default;
};

extern const std::string kDefaultSystemPrompt;

struct RolloutOptions {
  EpisodeLimits limits;
  Stage stage = Stage::One;
  RewardConfig config;
  std::string system_prompt = kDefaultSystemPrompt;
};

// Conversation: system prompt, question, then alternating assistant turns and
// user turns carrying <tool_response> payloads. Calls in an answering turn or
// beyond max_tool_calls are logged as failed and never dispatched. A
// POLICY_ERROR episode is scored with r_correct forced to 0.
EpisodeResult run_episode(Policy& policy, const QAPair& qa, const CorpusIndex& index,
                          const FaultConfig& faults, const RolloutOptions& options);

struct EvaluationReport {
  double accuracy = 0.0;
  double mean_r1 = 0.0;
  double mean_r2 = 0.0;
  std::vector<EpisodeResult> episodes;  // dataset order
};

// Episode i draws faults from derive_seed(faults.seed, i), so results do not
// depend on jobs.
EvaluationReport evaluate(const PolicyFactory& policies, const std::vector<QAPair>& dataset,
                          const CorpusIndex& index, const FaultConfig& faults,
                          const RolloutOptions& options, std::size_t jobs = 1);

}  // namespace rewardlab
