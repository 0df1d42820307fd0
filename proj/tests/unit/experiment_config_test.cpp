#include <gtest/gtest.h>

#include "riskcls/errors.hpp"
#include "riskcls/experiment_config.hpp"

using namespace riskcls;
using nlohmann::json;

namespace {

json base(const std::string& approach) {
  return {{"schema_version", 1}, {"name", "t"}, {"approach", approach}, {"data", {{"train", "train.jsonl"}}}};
}

json pl_section() {
  return {{"ratio", "8%"},
          {"sources", json::array({{{"id", "depression"}, {"path", "dep.jsonl"}, {"label", "c"}, {"weight", 1}},
                                   {{"id", "anxiety"}, {"path", "anx.jsonl"}, {"label", "b"}, {"weight", 2}}})}};
}

}  // namespace

TEST(ExperimentConfig, BaselineDefaults) {
  const auto cfg = parse_experiment_config(base("baseline"), "/cfg");
  EXPECT_EQ(cfg.approach, Approach::Baseline);
  EXPECT_EQ(cfg.train_path, std::filesystem::path("/cfg/train.jsonl"));
  EXPECT_EQ(cfg.train.epochs, 20u);
  EXPECT_EQ(cfg.train.batch_size, 32u);
  EXPECT_EQ(cfg.passage_cap, 100u);
  EXPECT_DOUBLE_EQ(cfg.valid_fraction, 0.2);
  EXPECT_FALSE(cfg.train_config().view.has_value());
}

TEST(ExperimentConfig, ApproachSectionMismatches) {
  auto baseline_with_kl = base("baseline");
  baseline_with_kl["mvl"] = {{"kl_weight", 1.0}};
  EXPECT_THROW(parse_experiment_config(baseline_with_kl, "/"), ConfigError);
  EXPECT_THROW(parse_experiment_config(base("mvl"), "/"), ConfigError);
  EXPECT_THROW(parse_experiment_config(base("pl"), "/"), ConfigError);
  EXPECT_THROW(parse_experiment_config(base("tap"), "/"), ConfigError);
  auto baseline_with_pl = base("baseline");
  baseline_with_pl["pl"] = pl_section();
  EXPECT_THROW(parse_experiment_config(baseline_with_pl, "/"), ConfigError);
}

TEST(ExperimentConfig, RejectsUnknownKeysAndVersions) {
  auto typo = base("baseline");
  typo["trian"] = json::object();
  EXPECT_THROW(parse_experiment_config(typo, "/"), ConfigError);
  auto version = base("baseline");
  version["schema_version"] = 2;
  EXPECT_THROW(parse_experiment_config(version, "/"), ConfigError);
  auto approach = base("bert");
  EXPECT_THROW(parse_experiment_config(approach, "/"), ConfigError);
}

TEST(ExperimentConfig, PseudoLabelSection) {
  auto doc = base("pl");
  doc["pl"] = pl_section();
  const auto cfg = parse_experiment_config(doc, "/cfg");
  ASSERT_TRUE(cfg.pl.has_value());
  EXPECT_DOUBLE_EQ(cfg.pl->ratio.value(), 0.08);
  ASSERT_EQ(cfg.pl->sources.size(), 2u);
  EXPECT_EQ(cfg.pl->sources[0].assigned, RiskLevel::C_MediumRisk);
  EXPECT_DOUBLE_EQ(cfg.pl->sources[1].weight.value(), 2.0);
  doc["pl"]["sources"][0]["label"] = "keep";
  EXPECT_FALSE(parse_experiment_config(doc, "/").pl->sources[0].assigned.has_value());
  doc["pl"]["sources"][0]["label"] = "z";
  EXPECT_THROW(parse_experiment_config(doc, "/"), ConfigError);
}

TEST(ExperimentConfig, ViewAndTapSections) {
  auto mvl = base("mvl");
  mvl["mvl"] = {{"view", "k_sum"}, {"k", 3}, {"kl_weight", 0.5}};
  const auto cfg = parse_experiment_config(mvl, "/");
  ASSERT_TRUE(cfg.train_config().view.has_value());
  EXPECT_EQ(cfg.train_config().view->kind, ViewKind::KSum);
  EXPECT_EQ(cfg.train_config().view->k, 3u);
  EXPECT_DOUBLE_EQ(cfg.train.kl_weight, 0.5);

  auto tap = base("tap");
  tap["data"]["unlabeled"] = "unlabeled.jsonl";
  tap["tap"] = {{"epochs", 2}};
  EXPECT_EQ(parse_experiment_config(tap, "/").train.tap_epochs, 2u);

  auto both = base("pl+mvl");
  both["mvl"] = {{"view", "beg_ed"}};
  both["pl"] = pl_section();
  EXPECT_NO_THROW(parse_experiment_config(both, "/"));
}

TEST(ExperimentConfig, JsonRoundTrip) {
  auto doc = base("pl+mvl");
  doc["mvl"] = {{"view", "word_mask"}, {"mask_rate", 0.2}};
  doc["pl"] = pl_section();
  doc["encoder"] = {{"dim", 16}, {"layers", 1}, {"max_len", 128}};
  const auto cfg = parse_experiment_config(doc, "/cfg");
  const auto again = parse_experiment_config(experiment_config_json(cfg), "/elsewhere");
  EXPECT_EQ(experiment_config_json(again), experiment_config_json(cfg));
}

TEST(ExperimentConfig, EncoderMustFitPassages) {
  auto doc = base("baseline");
  doc["encoder"] = {{"max_len", 64}};
  EXPECT_THROW(parse_experiment_config(doc, "/"), ConfigError);
}
