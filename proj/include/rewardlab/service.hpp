#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include <json.hpp>

#include "rewardlab/reward_composer.hpp"
#include "rewardlab/rollout.hpp"
#include "rewardlab/search_sim.hpp"

namespace httplib {
class Server;
}

namespace rewardlab {

inline constexpr std::size_t kMaxBatch = 1024;

struct ServiceConfig {
  RewardConfig rewards;
  FaultConfig faults;
  EpisodeLimits limits;
};

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

// Transport-independent handlers; the HTTP layer only forwards bodies.
class RewardService {
 public:
  RewardService(CorpusIndex index, ServiceConfig config);

  HttpReply score(const nlohmann::json& request) const;
  HttpReply score_batch(const nlohmann::json& request) const;
  HttpReply tool_search(const nlohmann::json& request);
  HttpReply tool_visit(const nlohmann::json& request);
  HttpReply run_episode(const nlohmann::json& request) const;
  HttpReply health() const;

  const std::string& config_hash() const { return config_hash_; }
  const CorpusIndex& index() const { return index_; }

 private:
  std::uint64_t next_call_index();

  CorpusIndex index_;
  ServiceConfig config_;
  std::string config_hash_;
  std::atomic<std::uint64_t> call_counter_{0};
};

// Owns an httplib server bound to host:port (port 0 picks a free one).
class HttpServer {
 public:
  explicit HttpServer(RewardService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port, or -1 when binding fails.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  // Blocks until listen() is serving requests.
  void wait_until_ready() const;
  void stop();

 private:
  RewardService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace rewardlab
