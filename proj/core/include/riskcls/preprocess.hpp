#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "riskcls/corpus.hpp"

namespace riskcls {

inline constexpr std::string_view kUrlToken = "_URL_";
inline constexpr std::string_view kPersonToken = "_PERSON_";
inline constexpr std::string_view kMaskToken = "_MASK_";
inline constexpr std::string_view kUnknownToken = "_UNK_";
inline constexpr std::string_view kPadToken = "_PAD_";

bool is_sentinel(std::string_view token) noexcept;

struct Sentence {
  std::vector<std::string> tokens;

  std::size_t word_count() const noexcept { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

struct Passage {
  std::vector<Sentence> sentences;
  std::string origin_post_id;

  std::size_t word_count() const noexcept;
  // Tokens of all sentences, in order.
  std::vector<std::string> tokens() const;
  bool operator==(const Passage&) const = default;
};

struct ProcessedUser {
  std::string user_id;
  std::vector<Passage> passages;

  bool operator==(const ProcessedUser&) const = default;
};

using WordSet = std::unordered_set<std::string>;

// Versioned word lists shipped with the library.
struct Lexicons {
  WordSet stopwords;
  WordSet names;
  WordSet abbreviations;

  static const Lexicons& builtin();
};

// One lowercase entry per line; '#' starts a comment line.
WordSet load_word_list(const std::filesystem::path& path);
WordSet parse_word_list(std::string_view text);

struct PreprocessConfig {
  std::size_t max_passage_len = 128;
  std::size_t passage_cap = 100;
  std::uint64_t seed = 0;
  std::shared_ptr<const Lexicons> lexicons;  // null means Lexicons::builtin()

  const Lexicons& lex() const { return lexicons ? *lexicons : Lexicons::builtin(); }
};

// Lowercase, URL -> _URL_, names -> _PERSON_, drop punctuation-only tokens
// and stopwords. Sentinel tokens are never dropped.
std::vector<std::string> normalize_text(std::string_view raw, const WordSet& stopwords, const WordSet& names);

// Splits after '.', '!' or '?' when followed by whitespace (or the end),
// unless the token ending there is a guarded abbreviation.
std::vector<std::string> split_sentences(std::string_view raw, const WordSet& abbreviations);
std::vector<std::string> split_sentences(std::string_view raw);

// Greedy stack chunking: sentences are pushed in order and the stack is
// flushed whenever the next sentence would exceed max_len. A sentence longer
// than max_len ends up alone in its own passage.
std::vector<Passage> chunk_passages(std::span<const Sentence> sentences, std::size_t max_len,
                                    const std::string& origin_post_id = {});

// Identity when passages.size() <= cap; otherwise a uniform sample of `cap`
// passages kept in their original order.
std::vector<Passage> cap_passages(std::span<const Passage> passages, std::size_t cap, std::uint64_t seed);

// Normalized sentences of one post (title first, then body); empty
// sentences are dropped.
std::vector<Sentence> post_sentences(const PostRecord& post, const PreprocessConfig& config);

// Throws EmptyAfterPreprocessing when nothing survives normalization.
ProcessedUser preprocess_user(const UserRecord& user, const PreprocessConfig& config);

struct ProcessedEntry {
  ProcessedUser user;
  std::optional<RiskLevel> label;
  Provenance provenance = Provenance::Gold;

  bool operator==(const ProcessedEntry&) const = default;
};

struct ProcessedCorpus {
  std::vector<ProcessedEntry> entries;
  std::vector<std::string> dropped_users;
};

ProcessedCorpus preprocess_dataset(const LabeledDataset& dataset, const PreprocessConfig& config);

// ProcessedUser JSONL: {"user_id", "label"?, "provenance"?, "passages":
// [{"post_id", "sentences": [[token, ...], ...]}]}
void write_processed(const std::vector<ProcessedEntry>& entries, std::ostream& out);
std::vector<ProcessedEntry> parse_processed(std::istream& in, const std::string& source_name);

}  // namespace riskcls
