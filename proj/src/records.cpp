#include "rewardlab/records.hpp"

#include <fstream>
#include <set>

#include "rewardlab/error.hpp"
#include "rewardlab/tag_parser.hpp"

namespace rewardlab {

json to_json(const Message& message) {
  return {{"role", std::string(to_string(message.role))}, {"content", message.content}};
}

Message message_from_json(const json& j) {
  const auto name = j.at("role").get<std::string>();
  const auto role = role_from_string(name);
  if (!role) throw Error(ErrorCode::ParseError, "unrecognized role '" + name + "'");
  return {*role, j.at("content").get<std::string>()};
}

json turns_to_json(const Transcript& transcript) {
  auto out = json::array();
  for (const auto& turn : transcript.turns) out.push_back(to_json(turn.message));
  return out;
}

Transcript transcript_from_turns(const json& turns) {
  if (!turns.is_array()) throw Error(ErrorCode::ParseError, "\"turns\" must be an array");
  std::vector<Message> messages;
  for (const auto& t : turns) messages.push_back(message_from_json(t));
  return make_transcript(messages);
}

json to_json(const ToolCallLog& log) {
  auto entries = json::array();
  for (const auto& e : log.entries) entries.push_back({{"tool_name", e.tool_name}, {"ok", e.ok}});
  return entries;
}

ToolCallLog tool_log_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "tool_log must be an array");
  std::vector<ToolCallEntry> entries;
  for (const auto& e : j) entries.push_back({e.at("tool_name").get<std::string>(), e.at("ok").get<bool>()});
  return make_tool_log(std::move(entries));
}

json to_json(const RewardBreakdown& r) {
  return {{"r_correct", r.r_correct}, {"r_xml", r.r_xml},   {"r_format", r.r_format},
          {"r_tool", r.r_tool},       {"r_think", r.r_think}, {"r_vs", r.r_vs},
          {"b", r.b},                 {"r1", r.r1},           {"r2", r.r2},
          {"g_format", r.g_format},   {"g_xml", r.g_xml}};
}

RewardBreakdown breakdown_from_json(const json& j) {
  RewardBreakdown r;
  r.r_correct = j.at("r_correct").get<double>();
  r.r_xml = j.at("r_xml").get<double>();
  r.r_format = j.at("r_format").get<double>();
  r.r_tool = j.at("r_tool").get<double>();
  r.r_think = j.at("r_think").get<double>();
  r.r_vs = j.at("r_vs").get<double>();
  r.b = j.at("b").get<double>();
  r.r1 = j.at("r1").get<double>();
  r.r2 = j.at("r2").get<double>();
  r.g_format = j.at("g_format").get<bool>();
  r.g_xml = j.at("g_xml").get<bool>();
  return r;
}

json to_json(const EpisodeResult& result) {
  json j = {{"qa_id", result.qa_id},
            {"turns", turns_to_json(result.transcript)},
            {"tool_log", to_json(result.tool_log)},
            {"search_count", result.tool_log.search_count},
            {"visit_count", result.tool_log.visit_count},
            {"breakdown", to_json(result.breakdown)},
            {"termination", std::string(to_string(result.termination))}};
  if (result.termination == Termination::PolicyError) j["policy_error"] = result.policy_detail;
  return j;
}

json to_json(const Document& doc) {
  return {{"doc_id", doc.doc_id}, {"title", doc.title}, {"body", doc.body}};
}

Document document_from_json(const json& j) {
  return {j.at("doc_id").get<std::string>(), j.value("title", std::string()), j.at("body").get<std::string>()};
}

json to_json(const QAPair& qa) {
  return {{"id", qa.id}, {"question", qa.question}, {"answers", qa.answers}};
}

QAPair qa_from_json(const json& j) {
  QAPair qa{j.at("id").get<std::string>(), j.at("question").get<std::string>(),
            j.at("answers").get<std::vector<std::string>>()};
  if (qa.answers.empty()) throw Error(ErrorCode::ParseError, "\"answers\" must be non-empty");
  return qa;
}

json to_json(const EpisodeLimits& limits) {
  return {{"max_assistant_turns", limits.max_assistant_turns},
          {"max_tool_calls", limits.max_tool_calls},
          {"max_total_bytes", limits.max_total_bytes}};
}

EpisodeLimits limits_from_json(const json& j, EpisodeLimits base) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "limits must be an object");
  auto read = [&](const char* key, std::size_t& field) {
    if (!j.contains(key)) return;
    const auto value = j[key].get<std::int64_t>();
    if (value < 1) throw Error(ErrorCode::ParseError, std::string(key) + " must be >= 1");
    field = static_cast<std::size_t>(value);
  };
  read("max_assistant_turns", base.max_assistant_turns);
  read("max_tool_calls", base.max_tool_calls);
  read("max_total_bytes", base.max_total_bytes);
  return base;
}

EpisodeContext context_from_json(const json& j) {
  EpisodeContext ctx{j.at("system_prompt").get<std::string>(), j.at("question").get<std::string>(), {}};
  for (const auto& p : j.value("tool_pairs", json::array())) {
    ctx.tool_pairs.push_back({p.at("call_text").get<std::string>(), p.at("response_text").get<std::string>()});
  }
  return ctx;
}

ComposerConfig composer_from_json(const json& j, ComposerConfig base) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config_overrides must be an object");
  auto read = [&](const json& src, const char* key, double& field) {
    if (src.contains(key)) field = src[key].get<double>();
  };
  const json& w = j.contains("weights") ? j["weights"] : j;
  read(w, "w_tool", base.weights.w_tool);
  read(w, "w_format", base.weights.w_format);
  read(w, "w_think", base.weights.w_think);
  read(w, "w_xml", base.weights.w_xml);
  read(w, "w_vs", base.weights.w_vs);
  read(j, "b_floor", base.b_floor);
  read(j, "log_arg_floor", base.log_arg_floor);
  read(j, "format_gate_threshold", base.format_gate_threshold);
  return base;
}

json to_json(const ComposerConfig& cfg) {
  return {{"weights",
           {{"w_tool", cfg.weights.w_tool},
            {"w_format", cfg.weights.w_format},
            {"w_think", cfg.weights.w_think},
            {"w_xml", cfg.weights.w_xml},
            {"w_vs", cfg.weights.w_vs}}},
          {"b_floor", cfg.b_floor},
          {"log_arg_floor", cfg.log_arg_floor},
          {"format_gate_threshold", cfg.format_gate_threshold}};
}

EpisodeRecord episode_record_from_json(const json& j) {
  EpisodeRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.question = j.value("question", std::string());
  rec.answers = j.at("answers").get<std::vector<std::string>>();
  if (rec.answers.empty()) throw Error(ErrorCode::ParseError, "\"answers\" must be non-empty");
  rec.transcript = transcript_from_turns(j.at("turns"));
  rec.transcript.metadata.episode_id = rec.id;
  if (j.contains("tool_log")) rec.tool_log = tool_log_from_json(j["tool_log"]);
  return rec;
}

namespace {

// Runs a per-line decoder, rethrowing any shape error with its line number.
template <typename T, typename Decode>
std::vector<T> decode_lines(const std::filesystem::path& path, Decode decode) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_number) + ": ";
    try {
      out.push_back(decode(json::parse(line), line_number));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, where + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DuplicateId || e.code() == ErrorCode::DuplicateDocId) throw;
      throw Error(ErrorCode::ParseError, where + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<json> read_json_lines(const std::filesystem::path& path) {
  return decode_lines<json>(path, [](const json& j, std::size_t) { return j; });
}


std::vector<EpisodeRecord> load_episodes(const std::filesystem::path& path) {
  return decode_lines<EpisodeRecord>(path, [](const json& j, std::size_t) { return episode_record_from_json(j); });
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  return decode_lines<Document>(path, [](const json& j, std::size_t) { return document_from_json(j); });
}

std::vector<QAPair> load_qa_dataset(const std::filesystem::path& path) {
  std::set<std::string> seen;
  return decode_lines<QAPair>(path, [&](const json& j, std::size_t line) {
    auto qa = qa_from_json(j);
    if (!seen.insert(qa.id).second) {
      throw Error(ErrorCode::DuplicateId, path.string() + ":" + std::to_string(line) + ": duplicate id '" + qa.id + "'");
    }
    return qa;
  });
}

json breakdown_record(const RewardBreakdown& breakdown, const std::string& config_hash, const std::string& id) {
  json j = to_json(breakdown);
  if (!id.empty()) j["id"] = id;
  j["config_hash"] = config_hash;
  return j;
}

}  // namespace rewardlab
