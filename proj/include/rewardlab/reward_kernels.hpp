#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rewardlab/tag_parser.hpp"
#include "rewardlab/trace.hpp"

namespace rewardlab {

struct NormalizationPolicy {
  bool case_fold = true;
  bool collapse_whitespace = true;
  bool strip_edge_punctuation = true;

  bool operator==(const NormalizationPolicy&) const = default;
};

struct ThinkRewardParams {
  double loc = 35.0;
  double scale = 150.0;
  double shape = -5.0;
  double normalizer = 0.0;  // filled by with_normalizer()

  bool operator==(const ThinkRewardParams&) const = default;
};

struct ToolCallEntry {
  std::string tool_name;
  bool ok = false;

  bool operator==(const ToolCallEntry&) const = default;
};

struct ToolCallLog {
  std::vector<ToolCallEntry> entries;
  std::size_t search_count = 0;
  std::size_t visit_count = 0;

  // Appends and keeps the search/visit tallies in sync with entries.
  void record(std::string tool_name, bool ok);
  std::size_t size() const { return entries.size(); }

  bool operator==(const ToolCallLog&) const = default;
};

ToolCallLog make_tool_log(std::vector<ToolCallEntry> entries);

struct ClampPolicy {
  bool clamp_xml = true;
  bool clamp_visit_search = true;

  bool operator==(const ClampPolicy&) const = default;
};

std::string normalize_answer(std::string_view text, const NormalizationPolicy& policy = {});

// 1.0 iff some normalized truth is a substring of the normalized answer. A
// truth that normalizes to the empty string never matches.
double correctness_reward(std::string_view answer, std::span<const std::string> truths,
                          const NormalizationPolicy& policy = {});

// Zero on UnbalancedTag, CallAndAnswerSameTurn or no assistant turns, else
// n_answer * (n_think + n_tool) / n_turn.
double xml_validity_reward(const TagCounts& counts, const StructureReport& report,
                           const ClampPolicy& clamp = {});

bool xml_structurally_valid(const StructureReport& report);

double format_adherence_reward(const Transcript& transcript);

double tool_execution_reward(const ToolCallLog& log);

double visit_search_reward(std::size_t visit_count, std::size_t search_count,
                           const ClampPolicy& clamp = {});

double standard_normal_pdf(double z);
double standard_normal_cdf(double z);

double skew_normal_density(double x, double loc, double scale, double shape);

// Log-space forms stay finite far into the tails where the densities underflow.
double log_standard_normal_cdf(double z);
double log_skew_normal_density(double x, double loc, double scale, double shape);

// sup of the density over x >= 0: dense grid, then golden-section refinement.
double think_normalizer(const ThinkRewardParams& params);

ThinkRewardParams with_normalizer(ThinkRewardParams params);

double think_efficiency_reward(double token_count, const ThinkRewardParams& params);

// log of think_efficiency_reward; strictly decreasing wherever the reward is.
double think_log_reward(double token_count, const ThinkRewardParams& params);

using TokenSplitter = std::function<std::size_t(std::string_view)>;

std::size_t whitespace_token_count(std::string_view text);

struct ThinkTokenReport {
  std::vector<std::size_t> span_tokens;
  std::vector<double> span_rewards;
  double aggregate = 1.0;
};

// Think spans of assistant turns only. No spans means aggregate 1.0.
ThinkTokenReport count_think_tokens(const Transcript& transcript, const ThinkRewardParams& params,
                                    const TokenSplitter& splitter = whitespace_token_count);

}  // namespace rewardlab
