#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riskcls/risk_level.hpp"

namespace riskcls {

struct PostRecord {
  std::string post_id;
  std::string subreddit;
  std::optional<std::int64_t> timestamp;
  std::string title;
  std::string body;

  bool operator==(const PostRecord&) const = default;
};

struct UserRecord {
  std::string user_id;
  std::vector<PostRecord> posts;

  bool operator==(const UserRecord&) const = default;
};

// Where a labeled entry came from.
enum class Provenance : std::uint8_t { Gold, PseudoAnxiety, PseudoDepression, PseudoTaskC, Synthetic };

std::string_view provenance_name(Provenance p) noexcept;
Provenance parse_provenance(std::string_view text);

struct DatasetEntry {
  UserRecord user;
  std::optional<RiskLevel> label;
  Provenance provenance = Provenance::Gold;

  bool operator==(const DatasetEntry&) const = default;
};

// Immutable list of users with optional labels. Construction rejects
// duplicate user ids and posts with duplicate ids inside one user.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  explicit LabeledDataset(std::vector<DatasetEntry> entries);

  const std::vector<DatasetEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const DatasetEntry& operator[](std::size_t i) const { return entries_[i]; }

  bool fully_labeled() const noexcept;
  std::array<std::size_t, kNumRiskLevels> label_counts() const noexcept;

  bool operator==(const LabeledDataset&) const = default;

 private:
  std::vector<DatasetEntry> entries_;
};

// Concatenation; fails on user-id collisions.
LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

// JSONL, one user per line (see README for the schema). Blank lines are
// skipped. Throws ParseError naming the 1-based line on malformed input and
// ValidationError on duplicate user ids.
LabeledDataset load_corpus(const std::filesystem::path& path);
LabeledDataset parse_corpus(std::istream& in, const std::string& source_name);
void save_corpus(const LabeledDataset& dataset, const std::filesystem::path& path);
void write_corpus(const LabeledDataset& dataset, std::ostream& out);

// Stratified split. Validation size is round_half_up(fraction * N), spread
// over classes by largest remainder on class sizes. true marks a
// validation member.
std::vector<bool> stratified_valid_mask(std::span<const RiskLevel> labels, double valid_fraction,
                                        std::uint64_t seed);
// Same split on a dataset. Returns (train, valid).
std::pair<LabeledDataset, LabeledDataset> split_train_valid(const LabeledDataset& dataset,
                                                            double valid_fraction,
                                                            std::uint64_t seed);

// Samples `count` users uniformly without replacement and stamps all of them
// with `assigned` and `provenance`.
LabeledDataset build_pseudo_labeled(const LabeledDataset& aux, RiskLevel assigned, std::size_t count,
                                    std::uint64_t seed, Provenance provenance);

// Same sampling, but keeps each user's own label and provenance.
LabeledDataset sample_users(const LabeledDataset& source, std::size_t count, std::uint64_t seed);

// Positive rational number p/q.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  // Accepts "3", "3/4", "0.08" or "8%".
  static Rational parse(std::string_view text);
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
};

struct MixComponent {
  std::string source_id;
  // nullopt keeps the source's own labels (crowd-labeled auxiliary data).
  std::optional<RiskLevel> assigned;
  Rational weight;
  Provenance provenance = Provenance::Synthetic;
};

struct MixSpec {
  std::vector<MixComponent> components;
  std::size_t total_count = 0;
};

// Largest-remainder apportionment of `total` over `weights`. Equal
// remainders are resolved in ascending `tie_order` rank (lower rank first).
std::vector<std::size_t> apportion(std::span<const Rational> weights, std::size_t total,
                                   std::span<const std::size_t> tie_order);

// Per-component counts for `spec`; ties go to the lexicographically smaller
// source id.
std::vector<std::size_t> realized_counts(const MixSpec& spec);

LabeledDataset mix_pseudo_sources(const MixSpec& spec,
                                  const std::map<std::string, LabeledDataset>& sources,
                                  std::uint64_t seed);

std::size_t round_half_up(double x);

// Number of pseudo users added for a given ratio.
std::size_t pseudo_count_for(std::size_t train_size, double ratio);

// train + the first pseudo_count_for(|train|, ratio) entries of pseudo.
LabeledDataset augment_training(const LabeledDataset& train, const LabeledDataset& pseudo, double ratio);

// ---------------------------------------------------------------------------
// Synthetic corpora

struct SyntheticProfile {
  std::vector<std::string> vocabulary;
  // Unnormalized token weights over `vocabulary`, one row per risk level.
  std::array<std::vector<double>, kNumRiskLevels> class_weights;
  // Relative class frequencies; equal weights give balanced labels.
  std::array<double, kNumRiskLevels> class_proportions{1.0, 1.0, 1.0, 1.0};
  std::size_t min_posts = 2, max_posts = 4;
  std::size_t min_sentences = 2, max_sentences = 5;
  std::size_t min_words = 4, max_words = 12;
  std::string user_prefix = "user";
  std::string subreddit = "SuicideWatch";
  Provenance provenance = Provenance::Synthetic;
  // When false the labels are left empty (unlabeled/auxiliary corpora).
  bool emit_labels = true;
};

// `shared_words` tokens common to all classes plus `class_words` tokens per
// class. Each generated word is class-specific with probability
// `class_word_share`. Shared and class vocabularies never overlap, so with
// class_word_share = 1 the classes have disjoint vocabularies.
SyntheticProfile make_separable_profile(std::size_t shared_words, std::size_t class_words,
                                        double class_word_share);

// Deterministic under seed. Labels are apportioned exactly by
// class_proportions (largest remainder), then shuffled across users.
LabeledDataset generate_synthetic_corpus(const SyntheticProfile& profile, std::size_t n_users,
                                         std::uint64_t seed);

// Generates n_users whose text follows one class profile (e.g. an
// auxiliary forum whose members resemble that class).
LabeledDataset generate_class_corpus(const SyntheticProfile& profile, RiskLevel like, std::size_t n_users,
                                     std::uint64_t seed);

}  // namespace riskcls
