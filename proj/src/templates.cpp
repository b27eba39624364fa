#include "rewardlab/templates.hpp"

namespace rewardlab {
namespace {

constexpr std::string_view kLeadIn = "Now let me think about this information and provide an answer:";

std::string call_line(const ToolPair& p) { return "<tool_call>" + p.call_text + "</tool_call>"; }
std::string response_line(const ToolPair& p) { return "<tool_response>" + p.response_text + "</tool_response>"; }

std::vector<std::string> header(const EpisodeContext& ctx) {
  return {"<|im_start|>system " + ctx.system_prompt + "<|im_end|>",
          "",
          "<|im_start|>user",
          ctx.question + "<|im_end|>",
          ""};
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  return out;
}

// Think-wrapped call/response pairs shared by T2 and T3.
std::vector<std::string> think_block(const EpisodeContext& ctx) {
  auto lines = header(ctx);
  lines.insert(lines.end(), {"<|im_start|>assistant", "", "<think>", ""});
  for (const auto& p : ctx.tool_pairs) {
    lines.push_back(call_line(p));
    lines.push_back(response_line(p));
    lines.push_back("");
  }
  return lines;
}

std::string render_baseline(const EpisodeContext& ctx) {
  auto lines = header(ctx);
  for (const auto& p : ctx.tool_pairs) {
    lines.push_back("<|im_start|>assistant");
    lines.push_back(call_line(p) + "<|im_end|>");
    lines.push_back("");
    lines.push_back("<|im_start|>user");
    lines.push_back(response_line(p) + "<|im_end|>");
    lines.push_back("");
  }
  lines.push_back("<|im_start|>assistant");
  return join(lines);
}

std::string render_calls_out(const EpisodeContext& ctx) {
  auto lines = header(ctx);
  lines.insert(lines.end(), {"<|im_start|>assistant", "", "<think>", "</think>", ""});
  if (!ctx.tool_pairs.empty()) {
    for (const auto& p : ctx.tool_pairs) lines.push_back(call_line(p));
    lines.push_back("");
  }
  lines.insert(lines.end(), {"<think>", ""});
  if (!ctx.tool_pairs.empty()) {
    for (const auto& p : ctx.tool_pairs) lines.push_back(response_line(p));
    lines.push_back("");
  }
  lines.emplace_back(kLeadIn);
  return join(lines);
}

std::string render_sequenced(const EpisodeContext& ctx) {
  auto lines = header(ctx);
  lines.insert(lines.end(), {"<|im_start|>assistant", "", "<think>", "</think>", ""});
  for (std::size_t i = 0; i < ctx.tool_pairs.size(); ++i) {
    const auto& p = ctx.tool_pairs[i];
    lines.insert(lines.end(), {call_line(p), "", "<think>", response_line(p)});
    if (i + 1 < ctx.tool_pairs.size()) {
      lines.insert(lines.end(), {"</think>", ""});
    } else {
      lines.push_back("");
    }
  }
  lines.emplace_back(kLeadIn);
  return join(lines);
}

}  // namespace

std::optional<TemplateId> template_from_string(std::string_view name) {
  for (auto id : kAllTemplates) {
    if (name == short_name(id) || name == long_name(id)) return id;
  }
  return std::nullopt;
}

std::string_view short_name(TemplateId id) {
  switch (id) {
    case TemplateId::T1_BASELINE: return "T1";
    case TemplateId::T2_THINK_OPEN: return "T2";
    case TemplateId::T3_ALL_INSIDE_THINK: return "T3";
    case TemplateId::T4_CALLS_OUT_RESPONSES_IN: return "T4";
    case TemplateId::T5_SEQUENCED_THINK: return "T5";
  }
  return "T1";
}

std::string_view long_name(TemplateId id) {
  switch (id) {
    case TemplateId::T1_BASELINE: return "T1_BASELINE";
    case TemplateId::T2_THINK_OPEN: return "T2_THINK_OPEN";
    case TemplateId::T3_ALL_INSIDE_THINK: return "T3_ALL_INSIDE_THINK";
    case TemplateId::T4_CALLS_OUT_RESPONSES_IN: return "T4_CALLS_OUT_RESPONSES_IN";
    case TemplateId::T5_SEQUENCED_THINK: return "T5_SEQUENCED_THINK";
  }
  return "T1_BASELINE";
}

std::vector<TemplateDescriptor> list_templates() {
  return {
      {TemplateId::T1_BASELINE, "Baseline: tool calls in assistant turns, responses in user turns", "-", 81.6},
      {TemplateId::T2_THINK_OPEN, "All call/response pairs inside one <think> block, left open after \"Reasoning:\"",
       "-", 82.2},
      {TemplateId::T3_ALL_INSIDE_THINK, "All call/response pairs inside one <think> block, closed after \"End of tools call.\"",
       "Model tries to call tools", 77.4},
      {TemplateId::T4_CALLS_OUT_RESPONSES_IN, "Calls outside <think>, all responses grouped in one open <think> block",
       "Model returns empty string", 73.8},
      {TemplateId::T5_SEQUENCED_THINK, "Each call followed by its own <think> block holding the response",
       "Model returns empty string", 63.0},
  };
}

std::string render(TemplateId id, const EpisodeContext& ctx) {
  switch (id) {
    case TemplateId::T1_BASELINE: return render_baseline(ctx);
    case TemplateId::T2_THINK_OPEN: {
      auto lines = think_block(ctx);
      lines.emplace_back("Reasoning:");
      return join(lines);
    }
    case TemplateId::T3_ALL_INSIDE_THINK: {
      auto lines = think_block(ctx);
      lines.emplace_back("End of tools call.");
      lines.emplace_back("</think>");
      return join(lines);
    }
    case TemplateId::T4_CALLS_OUT_RESPONSES_IN: return render_calls_out(ctx);
    case TemplateId::T5_SEQUENCED_THINK: return render_sequenced(ctx);
  }
  return {};
}

}  // namespace rewardlab
