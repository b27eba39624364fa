#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace rewardlab {

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;

  bool operator==(const Document&) const = default;
};

struct Posting {
  std::size_t doc = 0;  // position in CorpusIndex::documents()
  std::uint32_t term_frequency = 0;

  bool operator==(const Posting&) const = default;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Lowercase ASCII alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

// Immutable once built. Documents are stored in ascending doc_id order, so
// postings ordered by document position are also ordered by doc_id.
class CorpusIndex {
 public:
  CorpusIndex() = default;

  const std::vector<Document>& documents() const { return documents_; }
  std::size_t size() const { return documents_.size(); }
  std::size_t vocabulary_size() const { return postings_.size(); }
  double average_length() const { return average_length_; }
  std::size_t length(std::size_t doc) const { return lengths_[doc]; }

  const std::vector<Posting>* postings(std::string_view term) const;
  const Document* find(std::string_view doc_id) const;

  friend CorpusIndex build_index(std::vector<Document> docs);

 private:
  std::vector<Document> documents_;
  std::vector<std::size_t> lengths_;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::unordered_map<std::string, std::size_t> by_id_;
  double average_length_ = 0.0;
};

// Throws DuplicateDocId, EmptyBody.
CorpusIndex build_index(std::vector<Document> docs);

std::vector<Document> load_corpus(const std::filesystem::path& path);

struct SearchHit {
  std::string doc_id;
  std::string title;
  std::string snippet;
  double score = 0.0;

  bool operator==(const SearchHit&) const = default;
};

inline constexpr std::size_t kSnippetChars = 200;

// BM25 with idf = ln(1 + (N - df + 0.5) / (df + 0.5)). Repeated query terms
// contribute once per occurrence. Only documents matching some term are hits.
std::vector<SearchHit> search(const CorpusIndex& index, std::string_view query, std::size_t k,
                              const Bm25Params& params = {});

// Case-sensitive lookup. Throws UnknownDocId.
const std::string& visit(const CorpusIndex& index, std::string_view doc_id);

struct FaultConfig {
  double error_probability = 0.0;
  std::uint64_t seed = 0;
};

// Stateless: the same (seed, call_index) always gives the same answer.
bool fault_fires(const FaultConfig& faults, std::uint64_t call_index);

// Per-episode fault seed derived from a run seed and episode position.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct ToolCall {
  std::string tool_name;
  nlohmann::json arguments = nlohmann::json::object();
};

// {"name": ..., "arguments": {...}}. Throws MalformedCall.
ToolCall parse_tool_call(std::string_view text);

struct ToolResponse {
  bool ok = false;
  std::string payload;

  bool operator==(const ToolResponse&) const = default;
};

inline constexpr std::string_view kErrorMarker = "ERROR:";
inline constexpr std::string_view kSearchTool = "search";
inline constexpr std::string_view kVisitTool = "visit";
inline constexpr std::size_t kDefaultSearchK = 5;

std::string search_payload(const std::vector<SearchHit>& hits);

// Routes "search" and "visit". Failures (faults, unknown tools, bad arguments,
// unknown documents) come back as ok=false with an "ERROR:" payload.
ToolResponse dispatch_tool(const CorpusIndex& index, const ToolCall& call, const FaultConfig& faults,
                           std::uint64_t call_index);

}  // namespace rewardlab
