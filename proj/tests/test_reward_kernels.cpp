#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "oracles.hpp"
#include "rewardlab/error.hpp"
#include "rewardlab/reward_kernels.hpp"
#include "test_support.hpp"

using namespace rewardlab;

namespace {

StructureReport clean() { return {}; }

StructureReport with(ViolationCode code) {
  StructureReport r;
  r.violations.push_back({0, code});
  r.balanced = code != ViolationCode::UnbalancedTag;
  return r;
}

const std::vector<std::string> kParis{"Paris"};

}  // namespace

TEST(NormalizeAnswer, AppliesAllRules) { EXPECT_EQ(normalize_answer("  The Answer:  PARIS. "), "the answer: paris"); }
TEST(NormalizeAnswer, Empty) { EXPECT_EQ(normalize_answer(""), ""); }
TEST(NormalizeAnswer, AlreadyNormalized) { EXPECT_EQ(normalize_answer("paris"), "paris"); }

TEST(NormalizeAnswer, PolicySwitches) {
  EXPECT_EQ(normalize_answer(" A  b. ", {false, true, true}), "A b");
  EXPECT_EQ(normalize_answer(" A  b. ", {true, false, false}), " a  b. ");
  EXPECT_EQ(normalize_answer(" A  b. ", {true, true, false}), "a b.");
}

TEST(NormalizeAnswer, IdempotentOnRandomText) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto s = testing_support::random_unicode(rng, 20) + " ." + testing_support::random_unicode(rng, 5) + ". ";
    const auto once = normalize_answer(s);
    EXPECT_EQ(normalize_answer(once), once);
  }
}

TEST(CorrectnessReward, TruthInsideAnswer) {
  EXPECT_EQ(correctness_reward("The capital of France is Paris.", kParis), 1.0);
}
TEST(CorrectnessReward, Disjoint) { EXPECT_EQ(correctness_reward("London", kParis), 0.0); }
TEST(CorrectnessReward, CaseFold) { EXPECT_EQ(correctness_reward("paris", kParis), 1.0); }

TEST(CorrectnessReward, DirectionIsTruthInAnswer) {
  EXPECT_EQ(correctness_reward("Paris", std::vector<std::string>{"Paris, France"}), 0.0);
}

TEST(CorrectnessReward, AnyAliasMatches) {
  EXPECT_EQ(correctness_reward("It was Shakespeare", std::vector<std::string>{"William Shakespeare", "Shakespeare"}), 1.0);
}

TEST(CorrectnessReward, EmptyNormalizedTruthNeverMatches) {
  EXPECT_EQ(correctness_reward("anything", std::vector<std::string>{"..."}), 0.0);
}

TEST(CorrectnessReward, EmptyTruthsThrows) {
  try {
    correctness_reward("x", std::vector<std::string>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyTruths);
  }
}

TEST(CorrectnessReward, InvariantUnderNormalization) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto answer = testing_support::random_unicode(rng, 10) + " Paris ";
    const std::vector<std::string> truths{testing_support::random_unicode(rng, 3)};
    const std::vector<std::string> normalized_truths{normalize_answer(truths[0])};
    const double direct = correctness_reward(answer, truths);
    EXPECT_EQ(correctness_reward(normalize_answer(answer), truths), direct);
    EXPECT_EQ(correctness_reward(answer, normalized_truths), direct);
  }
}

TEST(XmlValidityReward, Examples) {
  EXPECT_EQ(xml_validity_reward({1, 1, 1, 2}, clean()), 1.0);
  EXPECT_EQ(xml_validity_reward({1, 0, 0, 1}, clean()), 0.0);
  EXPECT_EQ(xml_validity_reward({1, 3, 2, 3}, with(ViolationCode::CallAndAnswerSameTurn)), 0.0);
  EXPECT_EQ(xml_validity_reward({1, 3, 2, 3}, clean()), 1.0);
  EXPECT_NEAR(xml_validity_reward({1, 3, 2, 3}, clean(), {false, true}), 5.0 / 3.0, 1e-15);
}

TEST(XmlValidityReward, ZeroOnUnbalancedOrNoTurns) {
  EXPECT_EQ(xml_validity_reward({1, 1, 1, 2}, with(ViolationCode::UnbalancedTag)), 0.0);
  EXPECT_EQ(xml_validity_reward({0, 0, 0, 0}, clean()), 0.0);
}

TEST(XmlValidityReward, NestedAndStrayDoNotZero) {
  EXPECT_EQ(xml_validity_reward({1, 1, 1, 2}, with(ViolationCode::NestedTag)), 1.0);
  EXPECT_EQ(xml_validity_reward({1, 1, 1, 2}, with(ViolationCode::StrayTopLevelTag)), 1.0);
}

TEST(XmlValidityReward, OracleAgreement) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> d(0, 6);
  for (int i = 0; i < 1000; ++i) {
    TagCounts c{d(rng), d(rng), d(rng), d(rng)};
    const bool broken = d(rng) == 0;
    const auto report = broken ? with(ViolationCode::UnbalancedTag) : clean();
    EXPECT_NEAR(xml_validity_reward(c, report),
                oracle::xml(c.n_answer, c.n_think, c.n_tool, c.n_turn, broken), 1e-12);
  }
}

TEST(FormatAdherenceReward, AllCompliant) {
  const auto t = make_transcript({{Role::User, "q"},
                                  {Role::Assistant, "<think>a</think><tool_call>{}</tool_call>"},
                                  {Role::Assistant, "<think>b</think>\n<tool_call>{}</tool_call>\n"}});
  EXPECT_EQ(format_adherence_reward(t), 1.0);
}

TEST(FormatAdherenceReward, TrailingProseHalves) {
  const auto t = make_transcript({{Role::User, "q"},
                                  {Role::Assistant, "<think>a</think><tool_call>{}</tool_call>"},
                                  {Role::Assistant, "<answer>x</answer> Hope this helps!"}});
  EXPECT_EQ(format_adherence_reward(t), 0.5);
}

TEST(FormatAdherenceReward, ThinkOptional) {
  const auto t = make_transcript({{Role::User, "q"}, {Role::Assistant, "<answer>x</answer>"}});
  EXPECT_EQ(format_adherence_reward(t), 1.0);
}

TEST(FormatAdherenceReward, ShapeRejections) {
  for (const char* bad : {"<think>a</think>", "<tool_call>{}</tool_call><think>a</think>",
                          "<think>a</think><think>b</think><answer>x</answer>",
                          "<tool_call>1</tool_call><tool_call>2</tool_call>", "prose <answer>x</answer>",
                          "<think>a <answer>y</answer></think><answer>x</answer>", ""}) {
    const auto t = make_transcript({{Role::User, "q"}, {Role::Assistant, bad}});
    EXPECT_EQ(format_adherence_reward(t), 0.0) << bad;
  }
}

TEST(FormatAdherenceReward, NoAssistantTurns) {
  EXPECT_EQ(format_adherence_reward(make_transcript({{Role::User, "q"}})), 0.0);
}

TEST(FormatAdherenceReward, RegexOracleAgreement) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const auto t = testing_support::random_transcript(rng);
    std::vector<std::string> assistant;
    for (const auto& turn : t.turns) {
      if (turn.role() == Role::Assistant) assistant.push_back(turn.content());
    }
    EXPECT_DOUBLE_EQ(format_adherence_reward(t), oracle::format(assistant));
  }
}

TEST(ToolExecutionReward, Fractions) {
  EXPECT_EQ(tool_execution_reward(make_tool_log({{"search", true}, {"visit", true}, {"visit", true}})), 1.0);
  EXPECT_EQ(tool_execution_reward(make_tool_log({{"search", true}, {"visit", false}, {"x", true}, {"visit", false}})), 0.5);
  EXPECT_EQ(tool_execution_reward(ToolCallLog{}), 0.0);
}

TEST(ToolCallLog, CountsByName) {
  const auto log = make_tool_log({{"search", true}, {"visit", false}, {"teleport", true}, {"visit", true}});
  EXPECT_EQ(log.search_count, 1u);
  EXPECT_EQ(log.visit_count, 2u);
  EXPECT_LE(log.search_count + log.visit_count, log.size());
}

TEST(VisitSearchReward, Anchors) {
  EXPECT_EQ(visit_search_reward(5, 1), 1.0);
  EXPECT_EQ(visit_search_reward(1, 1), 0.0);
  EXPECT_EQ(visit_search_reward(0, 2), -0.5);
  EXPECT_NEAR(visit_search_reward(2, 1), 0.7071067811865475, 1e-9);
  EXPECT_EQ(visit_search_reward(0, 0), 0.0);
  EXPECT_EQ(visit_search_reward(9, 1), 1.0);
  EXPECT_GT(visit_search_reward(9, 1, {true, false}), 1.0);
}

TEST(VisitSearchReward, PenaltyExactWheneverSearchesExceedVisits) {
  for (std::size_t s = 1; s < 60; ++s) {
    for (std::size_t v = 0; v < s; ++v) EXPECT_EQ(visit_search_reward(v, s), -0.5);
  }
}

TEST(VisitSearchReward, NonDecreasingInVisits) {
  for (std::size_t s = 1; s < 20; ++s) {
    double prev = visit_search_reward(0, s);
    for (std::size_t v = 1; v < 200; ++v) {
      const double r = visit_search_reward(v, s);
      EXPECT_GE(r, prev);
      prev = r;
    }
  }
}

TEST(SkewNormalDensity, AtLocation) {
  EXPECT_NEAR(skew_normal_density(35, 35, 150, -5), 2.0 / 150.0 * 0.3989422804014327 * 0.5, 1e-15);
  EXPECT_NEAR(skew_normal_density(35, 35, 150, -5), 0.0026596152026762179, 1e-15);
}

TEST(SkewNormalDensity, SymmetricCase) {
  EXPECT_NEAR(skew_normal_density(35, 35, 150, 0), standard_normal_pdf(0) / 150, 1e-18);
}

TEST(SkewNormalDensity, AtZero) {
  EXPECT_NEAR(skew_normal_density(0, 35, 150, -5), 0.0045460, 1e-6);
  EXPECT_NEAR(skew_normal_density(0, 35, 150, -5), 0.0045465588801204016, 1e-15);
}

TEST(SkewNormalDensity, NonpositiveScale) {
  try {
    skew_normal_density(0, 0, 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonpositiveScale);
  }
  EXPECT_THROW(skew_normal_density(0, 0, -1, 1), Error);
}

TEST(SkewNormalDensity, RelativeAccuracyAgainstHighPrecision) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> x(-300, 700), loc(-50, 100), scale(1, 300), shape(-10, 10);
  for (int i = 0; i < 300; ++i) {
    const double xv = x(rng), lv = loc(rng), sv = scale(rng), av = shape(rng);
    const double expected = oracle::skew_normal(xv, lv, sv, av);
    if (expected < 1e-280) continue;
    EXPECT_NEAR(skew_normal_density(xv, lv, sv, av) / expected, 1.0, 1e-12) << xv << " " << lv << " " << sv << " " << av;
  }
}

TEST(ThinkNormalizer, DefaultsAttainedAtZero) {
  const ThinkRewardParams p;
  EXPECT_NEAR(think_normalizer(p), 0.0045460, 1e-6);
  EXPECT_EQ(think_normalizer(p), skew_normal_density(0, 35, 150, -5));
}

TEST(ThinkNormalizer, SymmetricInteriorMode) {
  EXPECT_NEAR(think_normalizer({35, 150, 0}), standard_normal_pdf(0) / 150, 1e-15);
}

TEST(ThinkNormalizer, HalfNormalLimit) {
  EXPECT_NEAR(think_normalizer({0, 1, -5}), standard_normal_pdf(0), 1e-15);
}

TEST(ThinkNormalizer, MatchesDenseGridSup) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> loc(-50, 200), scale(5, 200), shape(-8, 8);
  for (int i = 0; i < 10; ++i) {
    const ThinkRewardParams p{loc(rng), scale(rng), shape(rng)};
    const double grid = oracle::grid_sup(p.loc, p.scale, p.shape, std::max(p.loc, 0.0) + 10 * p.scale, 4000);
    const double sup = think_normalizer(p);
    EXPECT_GE(sup, grid * (1 - 1e-12));
    EXPECT_NEAR(sup / grid, 1.0, 1e-4);
  }
}

TEST(ThinkNormalizer, RejectsNonpositiveScale) { EXPECT_THROW(think_normalizer({0, 0, 1}), Error); }

TEST(ThinkEfficiencyReward, Anchors) {
  const auto p = with_normalizer({});
  EXPECT_EQ(think_efficiency_reward(0, p), 1.0);
  EXPECT_NEAR(think_efficiency_reward(35, p), 0.585, 0.001);
  EXPECT_LT(think_efficiency_reward(150, p), 1e-4);
  EXPECT_NEAR(think_efficiency_reward(35, p), 0.58497322322278737, 1e-12);
}

TEST(ThinkEfficiencyReward, StrictlyDecreasingOnIntegers) {
  const auto p = with_normalizer({});
  double prev_log = think_log_reward(0, p);
  double prev = think_efficiency_reward(0, p);
  EXPECT_NEAR(prev_log, 0.0, 1e-14);
  for (int x = 1; x <= 2000; ++x) {
    const double lr = think_log_reward(x, p);
    const double r = think_efficiency_reward(x, p);
    ASSERT_LT(lr, prev_log) << x;
    ASSERT_NEAR(lr, oracle::think_log_reward_default(x), 1e-9 * std::max(1.0, -lr)) << x;
    ASSERT_LE(r, prev) << x;
    if (prev > 0) ASSERT_LT(r, prev) << x;
    prev_log = lr;
    prev = r;
  }
}

TEST(ThinkEfficiencyReward, FarTailUsesLogSpace) {
  const auto p = with_normalizer({});
  EXPECT_LT(skew_normal_density(1100, 35, 150, -5), 1e-280);
  EXPECT_NEAR(think_efficiency_reward(1100, p) / 3.2531264212088803839e-287, 1.0, 1e-9);
  EXPECT_NEAR(think_efficiency_reward(1100, p) / oracle::think_reward_default(1100), 1.0, 1e-9);
  EXPECT_EQ(think_efficiency_reward(2000, p), 0.0);
  EXPECT_TRUE(std::isfinite(think_log_reward(2000, p)));
}

TEST(LogStandardNormalCdf, MatchesExtendedPrecision) {
  for (double z = -60; z <= 5; z += 0.25) {
    const long double expected = std::log(boost::math::erfc(-static_cast<long double>(z) / std::sqrt(2.0L)) / 2);
    EXPECT_NEAR(log_standard_normal_cdf(z), static_cast<double>(expected), 1e-12 * std::max(1.0, std::abs(z * z))) << z;
  }
}

TEST(ThinkEfficiencyReward, LongSidePenalizedMore) {
  for (int d = 1; d <= 35; ++d) {
    EXPECT_GT(skew_normal_density(35 - d, 35, 150, -5), skew_normal_density(35 + d, 35, 150, -5));
  }
}

TEST(CountThinkTokens, SingleSpan) {
  const auto t = make_transcript({{Role::User, "q"}, {Role::Assistant, "<think>search the topic now</think><answer>x</answer>"}});
  const auto r = count_think_tokens(t, with_normalizer({}));
  EXPECT_EQ(r.span_tokens, std::vector<std::size_t>{4});
  EXPECT_DOUBLE_EQ(r.aggregate, think_efficiency_reward(4, with_normalizer({})));
}

TEST(CountThinkTokens, MeanOfSpans) {
  std::string ten, sixty;
  for (int i = 0; i < 10; ++i) ten += "w ";
  for (int i = 0; i < 60; ++i) sixty += "w ";
  const auto t = make_transcript({{Role::User, "q"},
                                  {Role::Assistant, "<think>" + ten + "</think><tool_call>{}</tool_call>"},
                                  {Role::Assistant, "<think>" + sixty + "</think><answer>x</answer>"}});
  const auto p = with_normalizer({});
  const auto r = count_think_tokens(t, p);
  EXPECT_EQ(r.span_tokens, (std::vector<std::size_t>{10, 60}));
  EXPECT_GT(r.span_rewards[0], r.span_rewards[1]);
  EXPECT_NEAR(r.aggregate, (oracle::think_reward_default(10) + oracle::think_reward_default(60)) / 2, 1e-12);
}

TEST(CountThinkTokens, NoSpansScoresOne) {
  const auto t = make_transcript({{Role::User, "<think>not mine</think>"}, {Role::Assistant, "<answer>x</answer>"}});
  EXPECT_EQ(count_think_tokens(t, with_normalizer({})).aggregate, 1.0);
}

TEST(CountThinkTokens, PluggableSplitter) {
  const auto t = make_transcript({{Role::User, "q"}, {Role::Assistant, "<think>abcdef</think><answer>x</answer>"}});
  const auto r = count_think_tokens(t, with_normalizer({}), [](std::string_view s) { return s.size(); });
  EXPECT_EQ(r.span_tokens, std::vector<std::size_t>{6});
}

TEST(Kernels, BitIdenticalOnRepeat) {
  const auto p = with_normalizer({});
  for (int x = 0; x < 300; x += 7) {
    const double a = think_efficiency_reward(x, p);
    const double b = think_efficiency_reward(x, with_normalizer({}));
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  }
}
