#include "rewardlab/search_sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "rewardlab/error.hpp"

namespace rewardlab {
namespace {

std::string utf8_prefix(std::string_view text, std::size_t max_chars) {
  std::size_t chars = 0;
  std::size_t pos = 0;
  while (pos < text.size() && chars < max_chars) {
    const auto lead = static_cast<unsigned char>(text[pos]);
    std::size_t width = 1;
    if (lead >= 0xF0) width = 4;
    else if (lead >= 0xE0) width = 3;
    else if (lead >= 0xC0) width = 2;
    pos = std::min(text.size(), pos + width);
    ++chars;
  }
  return std::string(text.substr(0, pos));
}

std::seed_seq make_seed_seq(std::uint64_t a, std::uint64_t b) {
  return std::seed_seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                       static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
}

ToolResponse failure(std::string_view code, const std::string& message) {
  return {false, std::string(kErrorMarker) + " " + std::string(code) + ": " + message};
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

const std::vector<Posting>* CorpusIndex::postings(std::string_view term) const {
  const auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

const Document* CorpusIndex::find(std::string_view doc_id) const {
  const auto it = by_id_.find(std::string(doc_id));
  return it == by_id_.end() ? nullptr : &documents_[it->second];
}

CorpusIndex build_index(std::vector<Document> docs) {
  std::sort(docs.begin(), docs.end(),
            [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (i > 0 && docs[i].doc_id == docs[i - 1].doc_id) {
      throw Error(ErrorCode::DuplicateDocId, "duplicate doc_id '" + docs[i].doc_id + "'");
    }
    if (docs[i].body.empty()) {
      throw Error(ErrorCode::EmptyBody, "document '" + docs[i].doc_id + "' has an empty body");
    }
  }

  CorpusIndex index;
  index.documents_ = std::move(docs);
  std::size_t total_length = 0;
  for (std::size_t d = 0; d < index.documents_.size(); ++d) {
    const auto& doc = index.documents_[d];
    index.by_id_.emplace(doc.doc_id, d);
    const auto tokens = tokenize(doc.title + " " + doc.body);
    index.lengths_.push_back(tokens.size());
    total_length += tokens.size();
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (auto& [term, count] : tf) index.postings_[term].push_back({d, count});
  }
  if (!index.documents_.empty()) {
    index.average_length_ = static_cast<double>(total_length) / static_cast<double>(index.documents_.size());
  }
  return index;
}

std::vector<SearchHit> search(const CorpusIndex& index, std::string_view query, std::size_t k,
                              const Bm25Params& params) {
  if (k == 0 || index.size() == 0) return {};
  std::map<std::string, std::size_t> query_tf;
  for (auto& t : tokenize(query)) ++query_tf[t];

  const double n = static_cast<double>(index.size());
  std::vector<double> scores(index.size(), 0.0);
  std::vector<bool> matched(index.size(), false);
  for (const auto& [term, qtf] : query_tf) {
    const auto* list = index.postings(term);
    if (list == nullptr) continue;
    const double df = static_cast<double>(list->size());
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    for (const auto& p : *list) {
      const double tf = p.term_frequency;
      const double norm = 1.0 - params.b + params.b * static_cast<double>(index.length(p.doc)) / index.average_length();
      scores[p.doc] += static_cast<double>(qtf) * idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
      matched[p.doc] = true;
    }
  }

  std::vector<std::size_t> order;
  for (std::size_t d = 0; d < index.size(); ++d) {
    if (matched[d]) order.push_back(d);
  }
  // documents() is sorted by doc_id, so the position breaks ties.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  if (order.size() > k) order.resize(k);

  std::vector<SearchHit> hits;
  hits.reserve(order.size());
  for (auto d : order) {
    const auto& doc = index.documents()[d];
    hits.push_back({doc.doc_id, doc.title, utf8_prefix(doc.body, kSnippetChars), scores[d]});
  }
  return hits;
}

const std::string& visit(const CorpusIndex& index, std::string_view doc_id) {
  const auto* doc = index.find(doc_id);
  if (doc == nullptr) throw Error(ErrorCode::UnknownDocId, "no document '" + std::string(doc_id) + "'");
  return doc->body;
}

bool fault_fires(const FaultConfig& faults, std::uint64_t call_index) {
  if (!(faults.error_probability > 0.0)) return false;
  if (faults.error_probability >= 1.0) return true;
  auto seq = make_seed_seq(faults.seed, call_index);
  std::mt19937_64 gen(seq);
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return u < faults.error_probability;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  auto seq = make_seed_seq(seed, ~stream);
  std::mt19937_64 gen(seq);
  return gen();
}

ToolCall parse_tool_call(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedCall, e.what());
  }
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
    throw Error(ErrorCode::MalformedCall, "tool call must be an object with a string \"name\"");
  }
  ToolCall call;
  call.tool_name = j["name"].get<std::string>();
  if (j.contains("arguments")) {
    if (!j["arguments"].is_object()) throw Error(ErrorCode::MalformedCall, "\"arguments\" must be an object");
    call.arguments = j["arguments"];
  }
  return call;
}

std::string search_payload(const std::vector<SearchHit>& hits) {
  auto out = nlohmann::json::array();
  for (const auto& h : hits) {
    out.push_back({{"doc_id", h.doc_id}, {"title", h.title}, {"snippet", h.snippet}, {"score", h.score}});
  }
  return out.dump();
}

ToolResponse dispatch_tool(const CorpusIndex& index, const ToolCall& call, const FaultConfig& faults,
                           std::uint64_t call_index) {
  if (fault_fires(faults, call_index)) {
    return failure("FAULT_INJECTED", "simulated environment failure on call " + std::to_string(call_index));
  }
  const auto& args = call.arguments;
  if (call.tool_name == kSearchTool) {
    if (!args.contains("query") || !args["query"].is_string()) {
      return failure("INVALID_ARGUMENTS", "search requires a string \"query\"");
    }
    std::size_t k = kDefaultSearchK;
    if (args.contains("k")) {
      if (!args["k"].is_number_integer() || args["k"].get<std::int64_t>() < 1) {
        return failure("INVALID_ARGUMENTS", "\"k\" must be a positive integer");
      }
      k = args["k"].get<std::size_t>();
    }
    return {true, search_payload(search(index, args["query"].get<std::string>(), k))};
  }
  if (call.tool_name == kVisitTool) {
    if (!args.contains("doc_id") || !args["doc_id"].is_string()) {
      return failure("INVALID_ARGUMENTS", "visit requires a string \"doc_id\"");
    }
    const auto doc_id = args["doc_id"].get<std::string>();
    const auto* doc = index.find(doc_id);
    if (doc == nullptr) return failure("UNKNOWN_DOC_ID", "no document '" + doc_id + "'");
    return {true, doc->body};
  }
  return failure("UNKNOWN_TOOL", "no tool named '" + call.tool_name + "'");
}

}  // namespace rewardlab
