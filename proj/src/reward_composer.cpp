#include "rewardlab/reward_composer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>

#include "rewardlab/error.hpp"
#include "rewardlab/search_sim.hpp"
#include "rewardlab/tag_parser.hpp"

namespace rewardlab {

double behavioral_score(const BehaviorComponents& c, const Stage1Weights& w, bool xml_valid,
                        const ComposerConfig& cfg) {
  if (!xml_valid) return kInvalidXmlPenalty;
  const double sum = w.w_tool * c.r_tool + w.w_format * c.r_format + w.w_think * c.r_think +
                     w.w_xml * c.r_xml + w.w_vs * c.r_vs;
  return std::max(cfg.b_floor, sum);
}

double stage1_reward(double r_correct, double b, const ComposerConfig& cfg) {
  return r_correct * std::log(std::max(cfg.log_arg_floor, 1.001 + r_correct * b));
}

double stage2_reward(double r_correct, double r_format, double r_xml, const ComposerConfig& cfg) {
  const double g_format = r_format >= cfg.format_gate_threshold ? 1.0 : 0.0;
  const double g_xml = r_xml > 0.0 ? 1.0 : 0.0;
  return r_correct * g_format * g_xml;
}

RewardBreakdown compose(RewardBreakdown r, bool xml_valid, const ComposerConfig& cfg) {
  r.b = behavioral_score({r.r_tool, r.r_format, r.r_think, r.r_xml, r.r_vs}, cfg.weights, xml_valid, cfg);
  r.r1 = stage1_reward(r.r_correct, r.b, cfg);
  r.g_format = r.r_format >= cfg.format_gate_threshold;
  r.g_xml = r.r_xml > 0.0;
  r.r2 = stage2_reward(r.r_correct, r.r_format, r.r_xml, cfg);
  return r;
}

ToolCallLog infer_tool_log(const Transcript& transcript) {
  std::vector<ToolCallEntry> entries;
  std::deque<std::size_t> pending;
  for (const auto& turn : transcript.turns) {
    for (const auto& span : turn.spans) {
      if (span.kind == TagKind::ToolCall && turn.role() == Role::Assistant) {
        std::string name;
        try {
          name = parse_tool_call(span.inner_text).tool_name;
        } catch (const Error&) {
        }
        pending.push_back(entries.size());
        entries.push_back({std::move(name), false});
      } else if (span.kind == TagKind::ToolResponse && !pending.empty()) {
        std::string_view text = span.inner_text;
        while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
        entries[pending.front()].ok = !text.starts_with(kErrorMarker);
        pending.pop_front();
      }
    }
  }
  return make_tool_log(std::move(entries));
}

RewardBreakdown score_episode(const Episode& episode, Stage /*stage*/, const RewardConfig& cfg) {
  if (episode.truths.empty()) throw Error(ErrorCode::EmptyTruths, "episode has no ground-truth aliases");
  const auto counts = count_tags(episode.transcript);
  if (episode.tool_log.size() != counts.n_tool) {
    throw Error(ErrorCode::ToolLogMismatch, "tool log has " + std::to_string(episode.tool_log.size()) +
                                                " entries but transcript has " +
                                                std::to_string(counts.n_tool) + " tool_call spans");
  }
  const auto report = validate_structure(episode.transcript);
  const auto& k = cfg.kernels;

  RewardBreakdown r;
  if (const auto answer = terminal_answer(episode.transcript)) {
    r.r_correct = correctness_reward(*answer, episode.truths, k.normalization);
  }
  r.r_xml = xml_validity_reward(counts, report, k.clamp);
  r.r_format = format_adherence_reward(episode.transcript);
  r.r_tool = tool_execution_reward(episode.tool_log);
  r.r_think = count_think_tokens(episode.transcript, k.think).aggregate;
  r.r_vs = visit_search_reward(episode.tool_log.visit_count, episode.tool_log.search_count, k.clamp);
  return compose(r, xml_structurally_valid(report), cfg.composer);
}

}  // namespace rewardlab
