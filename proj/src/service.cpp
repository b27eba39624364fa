#include "rewardlab/service.hpp"

#include <httplib.h>

#include "rewardlab/error.hpp"
#include "rewardlab/records.hpp"
#include "rewardlab/reward_config.hpp"
#include "rewardlab/tag_parser.hpp"

namespace rewardlab {
namespace {

using nlohmann::json;

HttpReply error_reply(int status, std::string_view code, const std::string& message) {
  return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

// 4xx input problem raised while decoding a request.
struct BadRequest {
  int status;
  std::string code;
  std::string message;
};

[[noreturn]] void bad_request(std::string code, std::string message, int status = 400) {
  throw BadRequest{status, std::move(code), std::move(message)};
}

template <typename Fn>
HttpReply guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const BadRequest& e) {
    return error_reply(e.status, e.code, e.message);
  } catch (const json::exception& e) {
    return error_reply(400, "MALFORMED_BODY", e.what());
  } catch (const Error& e) {
    const int status = e.code() == ErrorCode::ToolLogMismatch ? 422 : 400;
    return error_reply(status, to_string(e.code()), e.what());
  }
}

Stage stage_from(const json& request) {
  if (!request.contains("stage")) return Stage::One;
  const auto& s = request["stage"];
  if (!s.is_number_integer() || (s.get<int>() != 1 && s.get<int>() != 2)) {
    bad_request("MALFORMED_BODY", "\"stage\" must be 1 or 2");
  }
  return static_cast<Stage>(s.get<int>());
}

}  // namespace

RewardService::RewardService(CorpusIndex index, ServiceConfig config)
    : index_(std::move(index)), config_(std::move(config)), config_hash_(rewardlab::config_hash(config_.rewards)) {}

std::uint64_t RewardService::next_call_index() { return call_counter_++; }

HttpReply RewardService::score(const json& request) const {
  return guarded([&]() -> HttpReply {
    if (!request.is_object()) bad_request("MALFORMED_BODY", "request must be an object");
    const bool has_raw = request.contains("raw");
    const bool has_turns = request.contains("turns");
    if (has_raw == has_turns) bad_request("MALFORMED_BODY", "exactly one of \"raw\" or \"turns\" is required");
    if (!request.contains("truths") || !request["truths"].is_array()) {
      bad_request("MALFORMED_BODY", "\"truths\" must be an array of strings");
    }
    Episode episode;
    episode.truths = request["truths"].get<std::vector<std::string>>();
    if (episode.truths.empty()) bad_request("EMPTY_TRUTHS", "\"truths\" must be non-empty");
    const Stage stage = stage_from(request);

    RewardConfig cfg = config_.rewards;
    if (request.contains("config_overrides")) {
      cfg.composer = composer_from_json(request["config_overrides"], cfg.composer);
      validate(cfg);
    }

    json warnings = json::array();
    episode.transcript = has_raw ? parse_transcript(request["raw"].get<std::string>())
                                 : transcript_from_turns(request["turns"]);
    if (episode.transcript.assistant_turn_count() == 0) warnings.push_back("transcript has no assistant turns");
    if (request.contains("tool_log") && !request["tool_log"].is_null()) {
      episode.tool_log = tool_log_from_json(request["tool_log"]);
    } else {
      episode.tool_log = infer_tool_log(episode.transcript);
      warnings.push_back("tool_log inferred from tool_response turns");
    }
    const auto breakdown = score_episode(episode, stage, cfg);
    return {200, {{"breakdown", to_json(breakdown)},
                  {"config_hash", rewardlab::config_hash(cfg)},
                  {"stage", static_cast<int>(stage)},
                  {"warnings", warnings}}};
  });
}

HttpReply RewardService::score_batch(const json& request) const {
  if (!request.is_array()) return error_reply(400, "MALFORMED_BODY", "batch body must be an array");
  if (request.size() > kMaxBatch) {
    return error_reply(413, "BATCH_TOO_LARGE", "batch size " + std::to_string(request.size()) + " exceeds " +
                                                   std::to_string(kMaxBatch));
  }
  json out = json::array();
  for (const auto& item : request) {
    auto reply = score(item);
    if (reply.status != 200) reply.body["status"] = reply.status;
    out.push_back(std::move(reply.body));
  }
  return {200, out};
}

HttpReply RewardService::tool_search(const json& request) {
  return guarded([&]() -> HttpReply {
    if (!request.is_object() || !request.contains("query") || !request["query"].is_string()) {
      bad_request("MALFORMED_BODY", "\"query\" must be a string");
    }
    json args = {{"query", request["query"]}};
    if (request.contains("k")) {
      if (!request["k"].is_number_integer() || request["k"].get<std::int64_t>() < 1) {
        bad_request("MALFORMED_BODY", "\"k\" must be a positive integer");
      }
      args["k"] = request["k"];
    }
    const auto response = dispatch_tool(index_, {std::string(kSearchTool), args}, config_.faults, next_call_index());
    return {200, {{"ok", response.ok}, {"payload", response.payload}}};
  });
}

HttpReply RewardService::tool_visit(const json& request) {
  return guarded([&]() -> HttpReply {
    if (!request.is_object() || !request.contains("doc_id") || !request["doc_id"].is_string()) {
      bad_request("MALFORMED_BODY", "\"doc_id\" must be a string");
    }
    const auto response = dispatch_tool(index_, {std::string(kVisitTool), {{"doc_id", request["doc_id"]}}},
                                        config_.faults, next_call_index());
    return {200, {{"ok", response.ok}, {"payload", response.payload}}};
  });
}

HttpReply RewardService::run_episode(const json& request) const {
  return guarded([&]() -> HttpReply {
    if (!request.is_object() || !request.contains("qa")) bad_request("MALFORMED_BODY", "\"qa\" is required");
    const QAPair qa = qa_from_json(request["qa"]);
    const bool has_script = request.contains("script");
    const bool has_url = request.contains("policy_url");
    if (has_script == has_url) bad_request("MALFORMED_BODY", "exactly one of \"script\" or \"policy_url\" is required");

    Policy policy = has_script ? scripted_policy(request["script"].get<std::vector<std::string>>())
                               : http_policy(request["policy_url"].get<std::string>());
    RolloutOptions options;
    options.limits = request.contains("limits") ? limits_from_json(request["limits"], config_.limits) : config_.limits;
    options.stage = stage_from(request);
    options.config = config_.rewards;
    if (request.contains("system_prompt")) options.system_prompt = request["system_prompt"].get<std::string>();
    const FaultConfig faults{config_.faults.error_probability,
                             request.value("seed", config_.faults.seed)};

    const auto result = rewardlab::run_episode(policy, qa, index_, faults, options);
    if (result.termination == Termination::PolicyError && result.policy_failure == PolicyFailure::Transport) {
      return error_reply(502, "POLICY_UNREACHABLE", result.policy_detail);
    }
    json body = to_json(result);
    body["config_hash"] = config_hash_;
    return {200, body};
  });
}

HttpReply RewardService::health() const {
  return {200, {{"status", "ok"}, {"corpus_doc_count", index_.size()}, {"config_hash", config_hash_}}};
}

HttpServer::HttpServer(RewardService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });
  auto respond = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  auto post = [this, respond](const std::string& path, auto handler) {
    server_->Post(path, [respond, handler](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception& e) {
        respond(res, error_reply(400, "MALFORMED_BODY", e.what()));
        return;
      }
      respond(res, handler(body));
    });
  };
  post("/v1/score", [this](const json& b) { return service_.score(b); });
  post("/v1/score_batch", [this](const json& b) { return service_.score_batch(b); });
  post("/v1/tools/search", [this](const json& b) { return service_.tool_search(b); });
  post("/v1/tools/visit", [this](const json& b) { return service_.tool_visit(b); });
  post("/v1/episodes/run", [this](const json& b) { return service_.run_episode(b); });
  server_->Get("/v1/health", [this, respond](const httplib::Request&, httplib::Response& res) {
    respond(res, service_.health());
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return server_->listen_after_bind(); }

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

}  // namespace rewardlab
