#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "riskcls/errors.hpp"
#include "riskcls/metrics.hpp"

using namespace riskcls;

namespace {

constexpr auto A = RiskLevel::A_NoRisk;
constexpr auto B = RiskLevel::B_LowRisk;
constexpr auto C = RiskLevel::C_MediumRisk;
constexpr auto D = RiskLevel::D_HighRisk;

std::vector<int> ints(const std::vector<RiskLevel>& xs) {
  std::vector<int> out;
  for (auto x : xs) out.push_back(static_cast<int>(index_of(x)));
  return out;
}

std::vector<RiskLevel> random_levels(std::mt19937_64& rng, std::size_t n) {
  std::vector<RiskLevel> out(n);
  for (auto& x : out) x = risk_level_at(rng() % 4);
  return out;
}

}  // namespace

TEST(Confusion, Examples) {
  const std::vector<RiskLevel> all{A, B, C, D};
  const auto diag = confusion_matrix(all, all);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(diag.counts[i][j], i == j ? 1u : 0u);
  }
  const std::vector<RiskLevel> ds(7, D), as(7, A);
  const auto shifted = confusion_matrix(ds, as);
  EXPECT_EQ(shifted.counts[0][3], 7u);
  EXPECT_EQ(shifted.total(), 7u);
  const auto small = confusion_matrix(std::vector<RiskLevel>{A, A, B}, std::vector<RiskLevel>{A, B, B});
  EXPECT_EQ(small.counts[0][0], 1u);
  EXPECT_EQ(small.counts[1][0], 1u);
  EXPECT_EQ(small.counts[1][1], 1u);
  EXPECT_EQ(small.total(), 3u);
  EXPECT_EQ(small.row_sum(1), 2u);
  EXPECT_EQ(small.column_sum(0), 2u);
  EXPECT_THROW(confusion_matrix(std::vector<RiskLevel>{A}, std::vector<RiskLevel>{A, B}), ValidationError);
  EXPECT_THROW(confusion_matrix(std::vector<RiskLevel>{}, std::vector<RiskLevel>{}), ValidationError);
}

TEST(PerClass, Examples) {
  const std::vector<RiskLevel> all{A, B, C, D, D};
  for (const auto& m : per_class_prf(confusion_matrix(all, all))) {
    EXPECT_EQ(m.precision, 1.0);
    EXPECT_EQ(m.recall, 1.0);
    EXPECT_EQ(m.f1, 1.0);
  }
  ConfusionMatrix cm;
  cm.counts[0] = {3, 1, 0, 0};
  cm.counts[1] = {1, 1, 0, 0};
  const auto m = per_class_prf(cm);
  EXPECT_DOUBLE_EQ(m[0].precision, 0.75);
  EXPECT_DOUBLE_EQ(m[0].recall, 0.75);
  EXPECT_DOUBLE_EQ(m[0].f1, 0.75);
  EXPECT_EQ(m[2].precision, 0.0);
  EXPECT_EQ(m[2].recall, 0.0);
  EXPECT_EQ(m[2].f1, 0.0);
  EXPECT_EQ(m[3].label, D);
}

TEST(Macro, Examples) {
  const std::vector<RiskLevel> all{A, B, C, D};
  EXPECT_EQ(macro_prf(confusion_matrix(all, all)).macro_f1, 1.0);
  std::array<ClassMetrics, 4> baseline{};
  const double f1s[] = {0.730, 0.077, 0.333, 0.566};
  for (std::size_t i = 0; i < 4; ++i) baseline[i] = {risk_level_at(i), 0, 0, f1s[i]};
  EXPECT_NEAR(macro_from_class_metrics(baseline).macro_f1, 0.4265, 5e-4);
  // Empty classes still count in the denominator.
  const std::vector<RiskLevel> only_a{A, A};
  EXPECT_DOUBLE_EQ(macro_prf(confusion_matrix(only_a, only_a)).macro_f1, 0.25);
}

TEST(Macro, MatchesBruteForceReference) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    const auto preds = random_levels(rng, n), golds = random_levels(rng, n);
    const auto cm = confusion_matrix(preds, golds);
    const auto got = per_class_prf(cm);
    for (int c = 0; c < 4; ++c) {
      const auto want = oracle::class_prf(ints(preds), ints(golds), c);
      EXPECT_NEAR(got[static_cast<std::size_t>(c)].precision, want.p, 1e-12);
      EXPECT_NEAR(got[static_cast<std::size_t>(c)].recall, want.r, 1e-12);
      EXPECT_NEAR(got[static_cast<std::size_t>(c)].f1, want.f, 1e-12);
    }
    const auto macro = macro_prf(cm);
    const auto want = oracle::macro_prf(ints(preds), ints(golds));
    EXPECT_NEAR(macro.macro_f1, want.f, 1e-12);
    EXPECT_NEAR(macro.macro_precision, want.p, 1e-12);
    EXPECT_NEAR(macro.macro_recall, want.r, 1e-12);
  }
}

TEST(Macro, InvariantUnderInstancePermutation) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 100;
    auto preds = random_levels(rng, n), golds = random_levels(rng, n);
    const auto before = confusion_matrix(preds, golds);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<RiskLevel> p2, g2;
    for (auto i : order) {
      p2.push_back(preds[i]);
      g2.push_back(golds[i]);
    }
    EXPECT_EQ(confusion_matrix(p2, g2), before);
  }
}

TEST(Distribution, Examples) {
  const auto all_a = risk_distribution(std::vector<RiskLevel>(9, A));
  EXPECT_EQ(all_a.fractions, (std::array<double, 4>{1, 0, 0, 0}));
  EXPECT_EQ(all_a.any_risk, 0.0);
  const auto even = risk_distribution(std::vector<RiskLevel>{A, B, C, D});
  for (double f : even.fractions) EXPECT_EQ(f, 0.25);
  EXPECT_DOUBLE_EQ(even.any_risk, 0.75);
  // 15.52% of 1176 is 182.5 posts, so bracket it with 182 and 183.
  for (std::size_t no_risk : {182u, 183u}) {
    std::vector<RiskLevel> posts(1176, C);
    std::fill_n(posts.begin(), no_risk, A);
    const auto dist = risk_distribution(posts);
    EXPECT_NEAR(dist.no_risk, 0.1552, 5e-4);
    EXPECT_NEAR(dist.any_risk, 0.8448, 5e-4);
    EXPECT_NEAR(dist.no_risk + dist.any_risk, 1.0, 1e-15);
  }
  EXPECT_THROW(risk_distribution(std::vector<RiskLevel>{}), ValidationError);
}

TEST(Distribution, FractionsSumToOne) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const auto preds = random_levels(rng, 1 + rng() % 3000);
    const auto dist = risk_distribution(preds);
    double sum = 0.0;
    for (double f : dist.fractions) sum += f;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(dist.no_risk + dist.any_risk, 1.0, 1e-12);
    EXPECT_EQ(dist.total, preds.size());
  }
}

TEST(Reports, ShapeAndRendering) {
  const std::vector<RiskLevel> preds{A, B, C, D, D}, golds{A, B, C, C, D};
  const auto report = evaluation_report(confusion_matrix(preds, golds));
  EXPECT_EQ(report["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(report["confusion_matrix"]["counts"].size(), 4u);
  EXPECT_EQ(report["per_class"].size(), 4u);
  EXPECT_TRUE(report.contains("macro"));
  EXPECT_NE(render_report_text(report).find("macro"), std::string::npos);
  const auto assessment = assessment_report(risk_distribution(preds));
  EXPECT_TRUE(assessment.contains("distribution"));
  EXPECT_FALSE(render_report_text(assessment).empty());
  EXPECT_EQ(format_prf(ClassMetrics{A, 0.742, 0.719, 0.730}), "0.742/0.719/0.730");
}
