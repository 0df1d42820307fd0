// Pipeline stages called as library functions.
#include <gtest/gtest.h>

#include <sstream>

#include "cli_runner.hpp"
#include "fixtures.hpp"
#include "riskcls/commands.hpp"
#include "riskcls/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace riskcls;
using riskcls::testkit::read_file;
using riskcls::testkit::read_lines;

namespace {

class Commands : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = riskcls::testkit::scratch_dir("commands");
    SynthOptions o;
    o.train_users = 60;
    o.test_users = 16;
    o.unlabeled_users = 20;
    o.auxiliary_users = 30;
    o.assess_users = 10;
    o.seed = 9;
    std::ostringstream log;
    cmd_synth(o, root_ / "data", log);
  }

  static fs::path data(const std::string& name) { return root_ / "data" / (name + ".jsonl"); }

  static ExperimentConfig pl_config(std::size_t sources) {
    json doc = {{"schema_version", 1},
                {"name", "pl"},
                {"approach", "pl"},
                {"seed", 4},
                {"data", {{"train", data("train").string()}}},
                {"output", {{"dir", (root_ / "runs").string()}}},
                {"encoder", {{"dim", 8}, {"layers", 1}}},
                {"train", {{"epochs", 1}, {"batch_size", 16}}},
                {"pl", {{"sources", {{{"id", "depression"}, {"path", data("depression").string()}, {"label", "c"}}}}}}};
    if (sources == 2) {
      doc["pl"]["sources"].push_back({{"id", "anxiety"}, {"path", data("anxiety").string()}, {"label", "b"}});
    }
    return parse_experiment_config(doc, root_);
  }

  static inline fs::path root_;
};

}  // namespace

TEST_F(Commands, SynthWritesEveryCorpusDeterministically) {
  const auto again = root_ / "data2";
  SynthOptions o;
  o.train_users = 60;
  o.test_users = 16;
  o.unlabeled_users = 20;
  o.auxiliary_users = 30;
  o.assess_users = 10;
  o.seed = 9;
  std::ostringstream log;
  const auto files = cmd_synth(o, again, log);
  ASSERT_EQ(files.size(), 7u);
  for (const auto& f : files) {
    EXPECT_EQ(read_file(f), read_file(root_ / "data" / f.filename())) << f;
  }
  EXPECT_EQ(load_corpus(data("train")).size(), 60u);
  EXPECT_EQ(load_corpus(data("depression")).size(), 30u);
  for (const auto& e : load_corpus(data("unlabeled")).entries()) EXPECT_FALSE(e.label.has_value());
}

TEST_F(Commands, RawAndProcessedCorporaLoadAlike) {
  const PreprocessConfig pp;
  const auto raw = load_any_corpus(data("test"), pp);
  EXPECT_TRUE(raw.was_raw);
  const auto processed_path = root_ / "test.processed.jsonl";
  {
    std::ofstream out(processed_path);
    write_processed(raw.entries, out);
  }
  const auto processed = load_any_corpus(processed_path, pp);
  EXPECT_FALSE(processed.was_raw);
  EXPECT_EQ(processed.entries, raw.entries);
}

TEST_F(Commands, MissingCorpusIsAnIoError) {
  EXPECT_THROW(load_any_corpus(root_ / "absent.jsonl", PreprocessConfig{}), IoError);
}

TEST_F(Commands, SweepTableLayout) {
  std::vector<SweepCell> cells(2);
  cells[0].key = "2%";
  cells[0].valid_macro_f1 = 0.41234;
  cells[1].key = "8%";
  cells[1].error = "not enough users";
  const std::vector<std::string> ids{"depression", "anxiety"};
  EXPECT_EQ(render_sweep_table(SweepKind::Ratio, cells, ids),
            "| #(pseudo) / #(training) | Macro-F1 on validation set |\n|---|---|\n"
            "| 2% | 0.412 |\n| 8% | failed: not enough users |\n");
  EXPECT_EQ(render_sweep_table(SweepKind::Mix, {}, ids),
            "| depression:anxiety | Macro-F1 on validation set |\n|---|---|\n");
}

TEST_F(Commands, FailingSweepCellDoesNotStopTheSweep) {
  // 48 training users after the split; 100% needs 48 depression users but only 30 exist.
  const std::vector<std::string> grid{"0.08", "100%", "4/100"};
  std::ostringstream log;
  const auto out = cmd_sweep(pl_config(1), SweepKind::Ratio, grid, 1, root_ / "sweep_fail", log);
  ASSERT_EQ(out.cells.size(), 3u);
  EXPECT_EQ(out.cells[0].key, "8%");
  EXPECT_TRUE(out.cells[0].valid_macro_f1.has_value());
  EXPECT_EQ(out.cells[0].pseudo_users, 4u);
  EXPECT_FALSE(out.cells[1].valid_macro_f1.has_value());
  EXPECT_FALSE(out.cells[1].error.empty());
  EXPECT_EQ(out.cells[2].key, "4%");
  EXPECT_EQ(out.cells[2].pseudo_users, 2u);
  const auto lines = read_lines(out.table);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[3].rfind("| 100% | failed: ", 0), 0u);
}

TEST_F(Commands, SweepIsIndependentOfWorkerCount) {
  const std::vector<std::string> grid{"1:2", "2:1", "1:1"};
  std::ostringstream log;
  const auto serial = cmd_sweep(pl_config(2), SweepKind::Mix, grid, 1, root_ / "mix_serial", log, 1);
  const auto parallel = cmd_sweep(pl_config(2), SweepKind::Mix, grid, 1, root_ / "mix_parallel", log, 3);
  EXPECT_EQ(read_file(serial.table), read_file(parallel.table));
  EXPECT_EQ(read_file(root_ / "mix_serial" / "sweep.json"), read_file(root_ / "mix_parallel" / "sweep.json"));
}

TEST_F(Commands, MixCellWithWrongArityFails) {
  const std::vector<std::string> grid{"1:2:3"};
  std::ostringstream log;
  const auto out = cmd_sweep(pl_config(2), SweepKind::Mix, grid, 1, root_ / "mix_bad", log);
  EXPECT_NE(out.cells[0].error.find("3 weights for 2 sources"), std::string::npos) << out.cells[0].error;
}

TEST_F(Commands, SweepWithoutPseudoLabelSectionIsAConfigError) {
  auto cfg = pl_config(1);
  cfg.approach = Approach::Baseline;
  cfg.pl.reset();
  const std::vector<std::string> grid{"8%"};
  std::ostringstream log;
  EXPECT_THROW(cmd_sweep(cfg, SweepKind::Ratio, grid, 1, root_ / "sweep_cfg", log), ConfigError);
}

TEST_F(Commands, AssessKeepsDroppedUsersInOrder) {
  auto cfg = pl_config(1);
  cfg.approach = Approach::Baseline;
  cfg.pl.reset();
  std::ostringstream log;
  const auto run = train_into(cfg, root_ / "assess_run", log);

  const auto corpus = root_ / "assess_with_empty.jsonl";
  {
    std::ofstream out(corpus);
    out << R"({"user_id":"first","posts":[{"post_id":"1","title":"Feeling okay","body":"Went running today."}]})" << "\n"
        << R"({"user_id":"empty","posts":[{"post_id":"2","body":"the of and"}]})" << "\n"
        << R"({"user_id":"last","posts":[{"post_id":"3","body":"Could not sleep again last night."}]})" << "\n";
  }
  const auto report = cmd_assess(run.run_dir, corpus, root_ / "assess_out", log);
  EXPECT_EQ(report["total"], 2);
  const auto lines = read_lines(root_ / "assess_out" / "predictions.jsonl");
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(json::parse(lines[0])["user_id"], "first");
  EXPECT_TRUE(json::parse(lines[1])["prediction"].is_null());
  EXPECT_EQ(json::parse(lines[1])["reason"], "empty_after_preprocessing");
  EXPECT_EQ(json::parse(lines[2])["user_id"], "last");
  const auto last = json::parse(lines[2]);
  double sum = 0;
  for (const auto& p : last["probs"]) sum += p.get<double>();
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST_F(Commands, EvalNeedsATrainedRun) {
  std::ostringstream log;
  EXPECT_THROW(cmd_eval(root_, data("test"), root_ / "eval_none", log), IoError);
}

TEST_F(Commands, CustomWordListsReachEveryStage) {
  const auto words = root_ / "stopwords.txt";
  std::ofstream(words) << "# test list\nsleep\nnight\n";
  const auto corpus = root_ / "sleep.jsonl";
  std::ofstream(corpus) << R"({"user_id":"u1","label":"b","posts":[{"post_id":"1","body":"Could not sleep again last night."}]})"
                        << "\n"
                        << R"({"user_id":"u2","label":"a","posts":[{"post_id":"2","body":"Sleep came early tonight."}]})"
                        << "\n";
  json doc = {{"schema_version", 1},
              {"name", "lists"},
              {"approach", "baseline"},
              {"data", {{"train", corpus.string()}, {"valid", corpus.string()}}},
              {"preprocess", {{"stopwords", words.filename().string()}}},
              {"encoder", {{"dim", 8}, {"layers", 1}}},
              {"train", {{"epochs", 1}}}};
  const auto cfg = parse_experiment_config(doc, root_);
  ASSERT_EQ(cfg.stopwords_path, root_ / "stopwords.txt");

  std::ostringstream log;
  cmd_preprocess(cfg, root_ / "lists_pre", log);
  const auto text = read_file(root_ / "lists_pre" / "train.processed.jsonl");
  EXPECT_EQ(text.find("\"sleep\""), std::string::npos);
  EXPECT_EQ(text.find("\"night\""), std::string::npos);
  // The shipped list is replaced, not extended.
  EXPECT_NE(text.find("\"not\""), std::string::npos) << text;

  const auto run = train_into(cfg, root_ / "lists_run", log);
  const auto snapshot = json::parse(read_file(run.run_dir / "config.json"));
  EXPECT_EQ(snapshot["preprocess"]["stopwords"], words.string());
  const auto report = cmd_eval(run.run_dir, corpus, root_ / "lists_eval", log);
  EXPECT_EQ(report["skipped_users"].size(), 0u);
}
