#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskcls/checkpoint.hpp"
#include "riskcls/experiment_config.hpp"

namespace riskcls {

// Pipeline stages behind the command-line verbs. Each writes its artifacts
// under the given directory and narrates progress to `log`. Outputs depend
// only on (config, seed, inputs).

// Raw corpora ({"posts": ...}) are preprocessed on load; processed corpora
// ({"passages": ...}) are read as is.
struct LoadedCorpus {
  std::vector<ProcessedEntry> entries;
  std::vector<std::string> dropped_users;
  bool was_raw = false;
};
LoadedCorpus load_any_corpus(const std::filesystem::path& path, const PreprocessConfig& config);

struct PreprocessOutput {
  std::vector<std::filesystem::path> files;
  nlohmann::json summary;
};
// Writes <role>.processed.jsonl per configured corpus plus preprocess_summary.json.
PreprocessOutput cmd_preprocess(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

struct PretrainOutput {
  std::filesystem::path checkpoint;
  TapResult tap;
};
// Writes encoder.ckpt, tap_curve.jsonl and tap_summary.json.
PretrainOutput cmd_pretrain(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

struct TrainOutput {
  std::filesystem::path run_dir;
  TrainState state;
  std::size_t train_users = 0;
  std::size_t pseudo_users = 0;
  std::size_t valid_users = 0;
};
// Creates a fresh run directory <out_root>/<name>-<timestamp> holding
// config.json, metrics.jsonl, train.log, summary.json and model.ckpt.
TrainOutput cmd_train(const ExperimentConfig& config, const std::filesystem::path& out_root, std::ostream& log);
// Same, into an existing or new directory chosen by the caller.
TrainOutput train_into(const ExperimentConfig& config, const std::filesystem::path& run_dir, std::ostream& log);

inline constexpr const char* kModelFile = "model.ckpt";

// Writes eval_report.json; returns the report.
nlohmann::json cmd_eval(const std::filesystem::path& run_dir, const std::filesystem::path& test_corpus,
                        const std::filesystem::path& out_dir, std::ostream& log, std::optional<std::uint64_t> seed = std::nullopt);

// Writes assessment_report.json and predictions.jsonl (one line per user).
nlohmann::json cmd_assess(const std::filesystem::path& run_dir, const std::filesystem::path& corpus,
                          const std::filesystem::path& out_dir, std::ostream& log, std::optional<std::uint64_t> seed = std::nullopt);

enum class SweepKind { Ratio, Mix };

struct SweepCell {
  std::string key;  // "8%" or "1:2"
  std::optional<double> valid_macro_f1;
  std::size_t pseudo_users = 0;
  std::string error;
};

struct SweepOutput {
  std::vector<SweepCell> cells;
  std::filesystem::path table;
};

inline constexpr std::size_t kSweepDefaultEpochs = 10;

// One training run per grid cell; a failing cell is recorded and the sweep
// moves on. Ratio cells read "0.08" or "8%"; mix cells read "1:2" with one
// weight per pseudo-label source in config order. Writes sweep.json and
// sweep.md.
SweepOutput cmd_sweep(const ExperimentConfig& base, SweepKind kind, std::span<const std::string> grid,
                      std::optional<std::size_t> epochs, const std::filesystem::path& out_dir, std::ostream& log,
                      std::size_t workers = 1);

std::string render_sweep_table(SweepKind kind, std::span<const SweepCell> cells, std::span<const std::string> source_ids);

// Stand-in corpora for the experiment grid.
struct SynthOptions {
  std::size_t train_users = 240;
  std::size_t test_users = 80;
  std::size_t unlabeled_users = 120;
  std::size_t auxiliary_users = 80;
  std::size_t assess_users = 60;
  double class_word_share = 0.1;
  std::uint64_t seed = 0;
};
// Writes train/test/unlabeled/depression/anxiety/taskc/assess .jsonl.
std::vector<std::filesystem::path> cmd_synth(const SynthOptions& options, const std::filesystem::path& out_dir,
                                             std::ostream& log);

}  // namespace riskcls
