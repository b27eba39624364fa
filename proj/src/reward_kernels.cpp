#include "rewardlab/reward_kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "rewardlab/error.hpp"

namespace rewardlab {
namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

}  // namespace

void ToolCallLog::record(std::string tool_name, bool ok) {
  if (tool_name == "search") ++search_count;
  if (tool_name == "visit") ++visit_count;
  entries.push_back({std::move(tool_name), ok});
}

ToolCallLog make_tool_log(std::vector<ToolCallEntry> entries) {
  ToolCallLog log;
  for (auto& e : entries) log.record(std::move(e.tool_name), e.ok);
  return log;
}

std::string normalize_answer(std::string_view text, const NormalizationPolicy& policy) {
  std::string out;
  out.reserve(text.size());
  bool in_space = false;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (policy.collapse_whitespace && is_space(c)) {
      in_space = true;
      continue;
    }
    if (in_space) {
      out.push_back(' ');
      in_space = false;
    }
    out.push_back(policy.case_fold ? static_cast<char>(std::tolower(c)) : ch);
  }
  if (in_space) out.push_back(' ');

  auto strippable = [&](char ch) {
    auto c = static_cast<unsigned char>(ch);
    if (policy.strip_edge_punctuation && (std::ispunct(c) || is_space(c))) return true;
    return policy.collapse_whitespace && is_space(c);
  };
  std::size_t first = 0;
  std::size_t last = out.size();
  while (first < last && strippable(out[first])) ++first;
  while (last > first && strippable(out[last - 1])) --last;
  return out.substr(first, last - first);
}

double correctness_reward(std::string_view answer, std::span<const std::string> truths,
                          const NormalizationPolicy& policy) {
  if (truths.empty()) throw Error(ErrorCode::EmptyTruths, "no ground-truth aliases given");
  const auto normalized_answer = normalize_answer(answer, policy);
  for (const auto& truth : truths) {
    const auto normalized_truth = normalize_answer(truth, policy);
    if (!normalized_truth.empty() && normalized_answer.find(normalized_truth) != std::string::npos) {
      return 1.0;
    }
  }
  return 0.0;
}

bool xml_structurally_valid(const StructureReport& report) {
  return !report.has(ViolationCode::UnbalancedTag) &&
         !report.has(ViolationCode::CallAndAnswerSameTurn);
}

double xml_validity_reward(const TagCounts& counts, const StructureReport& report,
                           const ClampPolicy& clamp) {
  if (!xml_structurally_valid(report) || counts.n_turn == 0) return 0.0;
  const double raw = static_cast<double>(counts.n_answer) *
                     static_cast<double>(counts.n_think + counts.n_tool) /
                     static_cast<double>(counts.n_turn);
  return clamp.clamp_xml ? std::min(1.0, raw) : raw;
}

double format_adherence_reward(const Transcript& transcript) {
  std::size_t turns = 0;
  std::size_t compliant = 0;
  for (const auto& turn : transcript.turns) {
    if (turn.role() != Role::Assistant) continue;
    ++turns;
    if (is_compliant_turn(turn)) ++compliant;
  }
  if (turns == 0) return 0.0;
  return static_cast<double>(compliant) / static_cast<double>(turns);
}

double tool_execution_reward(const ToolCallLog& log) {
  if (log.entries.empty()) return 0.0;
  const auto ok = std::count_if(log.entries.begin(), log.entries.end(),
                                [](const ToolCallEntry& e) { return e.ok; });
  return static_cast<double>(ok) / static_cast<double>(log.entries.size());
}

double visit_search_reward(std::size_t visit_count, std::size_t search_count, const ClampPolicy& clamp) {
  if (search_count > visit_count) return -0.5;
  if (search_count == 0) return 0.0;
  const double ratio = static_cast<double>(visit_count) / static_cast<double>(search_count);
  const double reward = std::pow((ratio - 1.0) / 4.0, 0.25);
  return clamp.clamp_visit_search ? std::min(1.0, reward) : reward;
}

double standard_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double skew_normal_density(double x, double loc, double scale, double shape) {
  if (!(scale > 0.0)) throw Error(ErrorCode::NonpositiveScale, "skew-normal scale must be > 0");
  const double z = (x - loc) / scale;
  return 2.0 / scale * standard_normal_pdf(z) * standard_normal_cdf(shape * z);
}

double log_standard_normal_cdf(double z) {
  if (z > -30.0) return std::log(standard_normal_cdf(z));
  // Asymptotic tail series; erfc underflows further out.
  const double inv2 = 1.0 / (z * z);
  const double series = 1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2 * (1.0 - 7.0 * inv2)));
  return -0.5 * z * z - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double log_skew_normal_density(double x, double loc, double scale, double shape) {
  if (!(scale > 0.0)) throw Error(ErrorCode::NonpositiveScale, "skew-normal scale must be > 0");
  const double z = (x - loc) / scale;
  return std::log(2.0 / scale) - 0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) +
         log_standard_normal_cdf(shape * z);
}

double think_normalizer(const ThinkRewardParams& params) {
  if (!(params.scale > 0.0)) throw Error(ErrorCode::NonpositiveScale, "skew-normal scale must be > 0");
  auto density = [&](double x) { return skew_normal_density(x, params.loc, params.scale, params.shape); };

  // The skew-normal is log-concave, so the grid maximum brackets the sup.
  constexpr int kGrid = 4096;
  const double upper = std::max(params.loc, 0.0) + 12.0 * params.scale;
  const double step = upper / kGrid;
  int best = 0;
  double best_value = density(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = density(i * step);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }

  double lo = std::max(0.0, (best - 1) * step);
  double hi = (best + 1) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = density(a);
  double fb = density(b);
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++iter) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = density(b);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = density(a);
    }
  }
  return std::max({best_value, fa, fb, density(0.5 * (lo + hi))});
}

ThinkRewardParams with_normalizer(ThinkRewardParams params) {
  params.normalizer = think_normalizer(params);
  return params;
}

namespace {

double normalizer_of(const ThinkRewardParams& params) {
  return params.normalizer > 0.0 ? params.normalizer : think_normalizer(params);
}

}  // namespace

double think_log_reward(double token_count, const ThinkRewardParams& params) {
  return log_skew_normal_density(token_count, params.loc, params.scale, params.shape) - std::log(normalizer_of(params));
}

double think_efficiency_reward(double token_count, const ThinkRewardParams& params) {
  const double normalizer = normalizer_of(params);
  const double density = skew_normal_density(token_count, params.loc, params.scale, params.shape);
  if (density >= 1e-280) return density / normalizer;
  return std::exp(think_log_reward(token_count, params));
}

std::size_t whitespace_token_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char ch : text) {
    const bool space = is_space(static_cast<unsigned char>(ch));
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

ThinkTokenReport count_think_tokens(const Transcript& transcript, const ThinkRewardParams& params,
                                    const TokenSplitter& splitter) {
  ThinkTokenReport report;
  for (const auto& turn : transcript.turns) {
    if (turn.role() != Role::Assistant) continue;
    for (const auto& span : turn.spans) {
      if (span.kind != TagKind::Think) continue;
      const auto tokens = splitter(span.inner_text);
      report.span_tokens.push_back(tokens);
      report.span_rewards.push_back(think_efficiency_reward(static_cast<double>(tokens), params));
    }
  }
  if (report.span_rewards.empty()) {
    report.aggregate = think_efficiency_reward(0.0, params);
  } else {
    double sum = 0.0;
    for (double r : report.span_rewards) sum += r;
    report.aggregate = sum / static_cast<double>(report.span_rewards.size());
  }
  return report;
}

}  // namespace rewardlab
