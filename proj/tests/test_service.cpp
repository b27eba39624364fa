#include <gtest/gtest.h>

#include <httplib.h>

#include <random>
#include <thread>

#include "rewardlab/records.hpp"
#include "rewardlab/reward_config.hpp"
#include "rewardlab/service.hpp"
#include "test_support.hpp"

using namespace rewardlab;
using namespace testing_support;
using nlohmann::json;

namespace {

json four_turn_request() {
  return {{"turns", turns_to_json(four_turn_exemplar())},
          {"truths", {"Paris"}},
          {"tool_log", to_json(make_tool_log({{"search", true}, {"visit", true}, {"visit", true}}))}};
}

RewardService make_service(FaultConfig faults = {}) { return RewardService(demo_index(), {{}, faults, {}}); }

// Serves a RewardService on an ephemeral port for the lifetime of the object.
class LiveServer {
 public:
  explicit LiveServer(RewardService& service) : server_(service) {
    port_ = server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.listen(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  int port() const { return port_; }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }

 private:
  HttpServer server_;
  int port_ = -1;
  std::thread thread_;
};

}  // namespace

TEST(ServiceScore, MatchesInProcess) {
  const auto svc = make_service();
  const auto reply = svc.score(four_turn_request());
  ASSERT_EQ(reply.status, 200) << reply.body.dump();
  const Episode ep{four_turn_exemplar(), {"Paris"}, make_tool_log({{"search", true}, {"visit", true}, {"visit", true}})};
  EXPECT_EQ(breakdown_from_json(reply.body["breakdown"]), score_episode(ep, Stage::One, {}));
  EXPECT_EQ(reply.body["config_hash"], config_hash({}));
  EXPECT_EQ(reply.body["stage"], 1);
  EXPECT_TRUE(reply.body["warnings"].empty());
}

TEST(ServiceScore, RawTranscriptAndInferredLog) {
  const auto svc = make_service();
  const json req = {{"raw", serialize_transcript(four_turn_exemplar())}, {"truths", {"Paris"}}, {"stage", 2}};
  const auto reply = svc.score(req);
  ASSERT_EQ(reply.status, 200) << reply.body.dump();
  EXPECT_EQ(reply.body["stage"], 2);
  EXPECT_EQ(reply.body["warnings"].size(), 1u);
  EXPECT_EQ(reply.body["breakdown"]["r_tool"], 1.0);
}

TEST(ServiceScore, ConfigOverridesChangeHash) {
  const auto svc = make_service();
  auto req = four_turn_request();
  req["config_overrides"] = {{"w_vs", 1.0}};
  const auto reply = svc.score(req);
  ASSERT_EQ(reply.status, 200);
  EXPECT_NE(reply.body["config_hash"], config_hash({}));
  req["config_overrides"] = {{"log_arg_floor", 0}};
  EXPECT_EQ(svc.score(req).status, 400);
}

TEST(ServiceScore, ErrorStatuses) {
  const auto svc = make_service();
  auto both = four_turn_request();
  both["raw"] = "x";
  EXPECT_EQ(svc.score(both).status, 400);
  auto no_truths = four_turn_request();
  no_truths.erase("truths");
  EXPECT_EQ(svc.score(no_truths).status, 400);
  auto empty_truths = four_turn_request();
  empty_truths["truths"] = json::array();
  EXPECT_EQ(svc.score(empty_truths).status, 400);
  auto bad_stage = four_turn_request();
  bad_stage["stage"] = 3;
  EXPECT_EQ(svc.score(bad_stage).status, 400);
  auto short_log = four_turn_request();
  short_log["tool_log"] = json::array();
  const auto mismatch = svc.score(short_log);
  EXPECT_EQ(mismatch.status, 422);
  EXPECT_EQ(mismatch.body["error"]["code"], "TOOL_LOG_MISMATCH");
  EXPECT_EQ(svc.score({{"raw", "<|im_start|>bogus\nx<|im_end|>"}, {"truths", {"a"}}}).status, 400);
  EXPECT_EQ(svc.score(json::array()).status, 400);
}

TEST(ServiceBatch, PreservesOrderAndInlinesErrors) {
  const auto svc = make_service();
  auto bad = four_turn_request();
  bad["tool_log"] = json::array();
  const auto reply = svc.score_batch(json::array({four_turn_request(), bad, four_turn_request()}));
  ASSERT_EQ(reply.status, 200);
  ASSERT_EQ(reply.body.size(), 3u);
  EXPECT_TRUE(reply.body[0].contains("breakdown"));
  EXPECT_EQ(reply.body[1]["status"], 422);
  EXPECT_EQ(reply.body[2], reply.body[0]);
}

TEST(ServiceBatch, TooLarge) {
  const auto svc = make_service();
  EXPECT_EQ(svc.score_batch(json::array()).status, 200);
  EXPECT_EQ(svc.score_batch(json(std::vector<json>(kMaxBatch + 1, json::object()))).status, 413);
  EXPECT_EQ(svc.score_batch(json::object()).status, 400);
}

TEST(ServiceTools, SearchAndVisit) {
  auto svc = make_service();
  const auto s = svc.tool_search({{"query", "capital of France"}, {"k", 2}});
  ASSERT_EQ(s.status, 200);
  EXPECT_TRUE(s.body["ok"].get<bool>());
  EXPECT_EQ(json::parse(s.body["payload"].get<std::string>()).size(), 2u);
  const auto v = svc.tool_visit({{"doc_id", "wiki-paris"}});
  EXPECT_EQ(v.body["payload"], visit(demo_index(), "wiki-paris"));
  const auto missing = svc.tool_visit({{"doc_id", "nope"}});
  EXPECT_EQ(missing.status, 200);
  EXPECT_FALSE(missing.body["ok"].get<bool>());
  EXPECT_EQ(svc.tool_search(json::object()).status, 400);
  EXPECT_EQ(svc.tool_visit({{"doc_id", 3}}).status, 400);
}

TEST(ServiceTools, FaultsApplied) {
  auto svc = make_service({1.0, 0});
  EXPECT_FALSE(svc.tool_search({{"query", "paris"}}).body["ok"].get<bool>());
}

TEST(ServiceEpisode, ScriptedRun) {
  const auto svc = make_service();
  const json req = {{"qa", to_json(france_qa())}, {"script", france_script()}, {"seed", 4}};
  const auto reply = svc.run_episode(req);
  ASSERT_EQ(reply.status, 200) << reply.body.dump();
  EXPECT_EQ(reply.body["termination"], "ANSWERED");
  EXPECT_EQ(reply.body["breakdown"]["r_correct"], 1.0);
  EXPECT_EQ(reply.body["search_count"], 1);
  EXPECT_EQ(reply.body["visit_count"], 1);
  EXPECT_EQ(svc.run_episode(req).body, reply.body);
}

TEST(ServiceEpisode, Errors) {
  const auto svc = make_service();
  EXPECT_EQ(svc.run_episode({{"script", {"x"}}}).status, 400);
  EXPECT_EQ(svc.run_episode({{"qa", to_json(france_qa())}}).status, 400);
  EXPECT_EQ(svc.run_episode({{"qa", to_json(france_qa())}, {"script", {"x"}}, {"limits", {{"max_tool_calls", 0}}}}).status, 400);
  const auto unreachable = svc.run_episode({{"qa", to_json(france_qa())}, {"policy_url", "http://127.0.0.1:1/policy"}});
  EXPECT_EQ(unreachable.status, 502);
}

TEST(ServiceHealth, ReportsCorpus) {
  const auto svc = make_service();
  const auto h = svc.health();
  EXPECT_EQ(h.body["status"], "ok");
  EXPECT_EQ(h.body["corpus_doc_count"], 20);
}

TEST(HttpServer, EndToEnd) {
  auto svc = make_service();
  LiveServer live(svc);
  ASSERT_GT(live.port(), 0);
  auto client = live.client();

  const auto health = client.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body)["corpus_doc_count"], 20);

  const auto scored = client.Post("/v1/score", four_turn_request().dump(), "application/json");
  ASSERT_TRUE(scored);
  EXPECT_EQ(scored->status, 200);
  EXPECT_EQ(json::parse(scored->body), svc.score(four_turn_request()).body);

  const auto garbage = client.Post("/v1/score", "{not json", "application/json");
  ASSERT_TRUE(garbage);
  EXPECT_EQ(garbage->status, 400);

  auto short_log = four_turn_request();
  short_log["tool_log"] = json::array();
  EXPECT_EQ(client.Post("/v1/score", short_log.dump(), "application/json")->status, 422);

  const auto big = json(std::vector<json>(kMaxBatch + 1, json::object()));
  EXPECT_EQ(client.Post("/v1/score_batch", big.dump(), "application/json")->status, 413);

  const json episode = {{"qa", to_json(france_qa())}, {"policy_url", "http://127.0.0.1:1/"}};
  EXPECT_EQ(client.Post("/v1/episodes/run", episode.dump(), "application/json")->status, 502);

  const auto searched = client.Post("/v1/tools/search", json{{"query", "paris"}}.dump(), "application/json");
  ASSERT_TRUE(searched);
  EXPECT_TRUE(json::parse(searched->body)["ok"].get<bool>());
}

TEST(HttpServer, HttpPolicyDrivesEpisode) {
  httplib::Server policy_server;
  int turn = 0;
  policy_server.Post("/policy", [&](const httplib::Request& req, httplib::Response& res) {
    EXPECT_TRUE(req.body.starts_with(std::string(kTurnStart) + "system"));
    res.set_content(france_script()[turn++], "text/plain");
  });
  const int port = policy_server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { policy_server.listen_after_bind(); });
  policy_server.wait_until_ready();

  const auto svc = make_service();
  const json req = {{"qa", to_json(france_qa())}, {"policy_url", "http://127.0.0.1:" + std::to_string(port) + "/policy"}};
  const auto reply = svc.run_episode(req);
  policy_server.stop();
  t.join();
  ASSERT_EQ(reply.status, 200) << reply.body.dump();
  EXPECT_EQ(reply.body["termination"], "ANSWERED");
  EXPECT_EQ(reply.body["breakdown"]["r_correct"], 1.0);
}

TEST(HttpServer, BindFailureReported) {
  auto svc = make_service();
  LiveServer first(svc);
  HttpServer second(svc);
  EXPECT_EQ(second.bind("127.0.0.1", first.port()), -1);
}
