#include "rewardlab/rollout.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <memory>
#include <thread>

#include <httplib.h>

#include "rewardlab/error.hpp"
#include "rewardlab/tag_parser.hpp"

namespace rewardlab {

const std::string kDefaultSystemPrompt =
    "You are a research assistant with two tools. Call a tool by writing "
    "<tool_call>{\"name\": \"search\", \"arguments\": {\"query\": \"...\", \"k\": 5}}</tool_call> "
    "or <tool_call>{\"name\": \"visit\", \"arguments\": {\"doc_id\": \"...\"}}</tool_call>. "
    "Tool results arrive inside <tool_response></tool_response>. You may reason briefly inside "
    "<think></think> first. Make at most one tool call per turn, and give the final answer as "
    "<answer>...</answer>.";

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::Answered: return "ANSWERED";
    case Termination::TurnLimit: return "TURN_LIMIT";
    case Termination::ToolLimit: return "TOOL_LIMIT";
    case Termination::ByteLimit: return "BYTE_LIMIT";
    case Termination::PolicyError: return "POLICY_ERROR";
  }
  return "POLICY_ERROR";
}

Policy scripted_policy(std::vector<std::string> script) {
  auto state = std::make_shared<std::pair<std::vector<std::string>, std::size_t>>(std::move(script), 0);
  return [state](const std::string&) {
    auto& [turns, next] = *state;
    if (next >= turns.size()) return PolicyReply::fail(PolicyFailure::Exhausted, "script exhausted");
    return PolicyReply::ok(turns[next++]);
  };
}

Policy http_policy(const std::string& url, double timeout_seconds) {
  const auto scheme_end = url.find("://");
  const auto host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_begin = url.find('/', host_begin);
  const std::string origin = url.substr(0, path_begin);
  const std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);
  return [origin, path, timeout_seconds](const std::string& conversation) {
    httplib::Client client(origin);
    const auto secs = static_cast<time_t>(timeout_seconds);
    const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    const auto res = client.Post(path, conversation, "text/plain");
    if (!res) {
      return PolicyReply::fail(PolicyFailure::Transport, "policy endpoint unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
      return PolicyReply::fail(PolicyFailure::Rejected, "policy endpoint returned status " + std::to_string(res->status));
    }
    return PolicyReply::ok(res->body);
  };
}

namespace {

std::size_t framed_size(const Message& m) {
  return kTurnStart.size() + to_string(m.role).size() + 1 + m.content.size() + kTurnEnd.size() + 1;
}

}  // namespace

EpisodeResult run_episode(Policy& policy, const QAPair& qa, const CorpusIndex& index,
                          const FaultConfig& faults, const RolloutOptions& options) {
  const auto& limits = options.limits;
  EpisodeResult result;
  result.qa_id = qa.id;
  auto& transcript = result.transcript;
  transcript.metadata = {qa.id, faults.seed};

  std::size_t bytes = 0;
  auto append = [&](Role role, std::string content) {
    transcript.turns.push_back(parse_turn(content, role));
    bytes += framed_size(transcript.turns.back().message);
  };
  append(Role::System, options.system_prompt);
  append(Role::User, qa.question);

  std::uint64_t call_index = 0;
  std::size_t calls_made = 0;
  std::size_t assistant_turns = 0;
  int empty_replies = 0;
  Termination termination = Termination::TurnLimit;

  while (true) {
    if (assistant_turns >= limits.max_assistant_turns) {
      termination = Termination::TurnLimit;
      break;
    }
    auto reply = policy(serialize_transcript(transcript));
    if (reply.failure != PolicyFailure::None) {
      termination = Termination::PolicyError;
      result.policy_failure = reply.failure;
      result.policy_detail = reply.detail;
      break;
    }
    if (reply.content.empty()) {
      if (++empty_replies >= 2) {
        termination = Termination::PolicyError;
        result.policy_failure = PolicyFailure::Rejected;
        result.policy_detail = "policy returned empty content twice in a row";
        break;
      }
      continue;
    }
    empty_replies = 0;

    append(Role::Assistant, std::move(reply.content));
    ++assistant_turns;
    const ParsedTurn turn = transcript.turns.back();

    std::vector<std::string> call_texts;
    for (const auto& span : turn.spans) {
      if (span.kind == TagKind::ToolCall) call_texts.push_back(span.inner_text);
    }

    if (turn.has(TagKind::Answer)) {
      for (const auto& text : call_texts) {
        std::string name;
        try {
          name = parse_tool_call(text).tool_name;
        } catch (const Error&) {
        }
        result.tool_log.record(std::move(name), false);
      }
      termination = Termination::Answered;
      break;
    }

    bool over_tool_limit = false;
    for (const auto& text : call_texts) {
      std::optional<ToolCall> call;
      std::string malformed;
      try {
        call = parse_tool_call(text);
      } catch (const Error& e) {
        malformed = e.what();
      }
      std::string name = call ? call->tool_name : std::string();
      if (calls_made >= limits.max_tool_calls) {
        over_tool_limit = true;
        result.tool_log.record(std::move(name), false);
        continue;
      }
      ++calls_made;
      ToolResponse response;
      if (call) {
        response = dispatch_tool(index, *call, faults, call_index++);
      } else {
        response = {false, std::string(kErrorMarker) + " " + malformed};
      }
      result.tool_log.record(std::move(name), response.ok);
      append(Role::User, "<tool_response>" + response.payload + "</tool_response>");
    }

    if (bytes > limits.max_total_bytes) {
      termination = Termination::ByteLimit;
      break;
    }
    if (over_tool_limit) {
      termination = Termination::ToolLimit;
      break;
    }
  }
  result.termination = termination;

  Episode episode{transcript, qa.answers, result.tool_log};
  result.breakdown = score_episode(episode, options.stage, options.config);
  if (termination == Termination::PolicyError && result.breakdown.r_correct != 0.0) {
    auto forced = result.breakdown;
    forced.r_correct = 0.0;
    const bool xml_valid = xml_structurally_valid(validate_structure(transcript));
    result.breakdown = compose(forced, xml_valid, options.config.composer);
  }
  return result;
}

EvaluationReport evaluate(const PolicyFactory& policies, const std::vector<QAPair>& dataset,
                          const CorpusIndex& index, const FaultConfig& faults,
                          const RolloutOptions& options, std::size_t jobs) {
  if (dataset.empty()) throw Error(ErrorCode::ParseError, "dataset is empty");
  EvaluationReport report;
  report.episodes.resize(dataset.size());

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(dataset.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < dataset.size(); i = next++) {
      try {
        Policy policy = policies(dataset[i]);
        const FaultConfig episode_faults{faults.error_probability, derive_seed(faults.seed, i)};
        report.episodes[i] = run_episode(policy, dataset[i], index, episode_faults, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, dataset.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (const auto& e : report.episodes) {
    report.accuracy += e.breakdown.r_correct;
    report.mean_r1 += e.breakdown.r1;
    report.mean_r2 += e.breakdown.r2;
  }
  const auto n = static_cast<double>(dataset.size());
  report.accuracy /= n;
  report.mean_r1 /= n;
  report.mean_r2 /= n;
  return report;
}

}  // namespace rewardlab
