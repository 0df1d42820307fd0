#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "riskcls/corpus.hpp"
#include "riskcls/trainer.hpp"

namespace riskcls {

inline constexpr int kExperimentSchemaVersion = 1;

enum class Approach : std::uint8_t { Baseline, TAP, MVL, PL, PLMVL };

std::string_view approach_name(Approach a) noexcept;  // baseline, tap, mvl, pl, pl+mvl
Approach parse_approach(std::string_view text);

bool approach_uses_view(Approach a) noexcept;
bool approach_uses_pseudo_labels(Approach a) noexcept;

struct PseudoSource {
  std::string id;
  std::filesystem::path path;
  std::optional<RiskLevel> assigned;  // nullopt keeps the source's labels
  Rational weight;
  std::string weight_text = "1";
};

struct PseudoLabelConfig {
  Rational ratio{2, 25};
  std::string ratio_text = "0.08";
  std::vector<PseudoSource> sources;
};

struct TapSettings {
  // Starts fine-tuning from this encoder instead of pre-training inline.
  std::optional<std::filesystem::path> checkpoint;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Approach approach = Approach::Baseline;
  std::uint64_t seed = 0;

  std::filesystem::path train_path;
  std::optional<std::filesystem::path> valid_path;
  std::optional<std::filesystem::path> test_path;
  std::optional<std::filesystem::path> unlabeled_path;
  double valid_fraction = 0.2;
  std::filesystem::path out_dir = "runs";

  std::size_t max_passage_len = 128;
  std::size_t passage_cap = 100;
  std::size_t min_freq = 1;
  // Replace the shipped word lists when set.
  std::optional<std::filesystem::path> stopwords_path;
  std::optional<std::filesystem::path> names_path;

  // Holds encoder shape, optimizer settings, view, kl_weight and TAP knobs.
  TrainConfig train;
  std::optional<TapSettings> tap;
  std::optional<PseudoLabelConfig> pl;

  PreprocessConfig preprocess_config() const;
  // TrainConfig with the experiment seed applied.
  TrainConfig train_config() const;

  // Throws ConfigError when approach-specific sections are missing or
  // present without being used, or a value is out of range.
  void validate() const;
};

// Relative paths resolve against base_dir. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Normalized snapshot with absolute paths; parse_experiment_config accepts it.
nlohmann::json experiment_config_json(const ExperimentConfig& config);

}  // namespace riskcls
