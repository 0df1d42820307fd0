#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "riskcls/classifier.hpp"
#include "riskcls/corpus.hpp"
#include "riskcls/preprocess.hpp"
#include "riskcls/trainer.hpp"

namespace riskcls::testkit {

inline Sentence sentence_of(std::size_t words, const std::string& stem = "w") {
  Sentence s;
  for (std::size_t i = 0; i < words; ++i) s.tokens.push_back(stem + std::to_string(i));
  return s;
}

inline std::vector<Sentence> sentences_of(const std::vector<std::size_t>& counts) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < counts.size(); ++i) out.push_back(sentence_of(counts[i], "s" + std::to_string(i) + "_"));
  return out;
}

inline Passage passage_of(const std::vector<std::size_t>& counts) {
  Passage p;
  p.sentences = sentences_of(counts);
  p.origin_post_id = "p";
  return p;
}

inline ProcessedUser user_of(const std::string& id, std::vector<Passage> passages) {
  return {id, std::move(passages)};
}

// Random ProcessedUser over tokens t0..t{vocab-1}.
inline ProcessedUser random_user(std::mt19937_64& rng, const std::string& id, std::size_t vocab,
                                 std::size_t max_passages = 3, std::size_t max_sentences = 3,
                                 std::size_t max_words = 5) {
  std::uniform_int_distribution<std::size_t> np(1, max_passages), ns(1, max_sentences), nw(1, max_words),
      tok(0, vocab - 1);
  ProcessedUser u{id, {}};
  for (std::size_t p = np(rng); p > 0; --p) {
    Passage passage;
    passage.origin_post_id = id + "_p";
    for (std::size_t s = ns(rng); s > 0; --s) {
      Sentence sent;
      for (std::size_t w = nw(rng); w > 0; --w) sent.tokens.push_back("t" + std::to_string(tok(rng)));
      passage.sentences.push_back(std::move(sent));
    }
    u.passages.push_back(std::move(passage));
  }
  return u;
}

inline Vocabulary token_vocabulary(std::size_t vocab) {
  std::vector<std::string> tokens{"_PAD_", "_UNK_", "_MASK_", "_PERSON_", "_URL_"};
  for (std::size_t i = 0; i < vocab; ++i) tokens.push_back("t" + std::to_string(i));
  return Vocabulary::from_tokens(tokens);
}

// Synthetic corpus preprocessed with default settings.
inline std::vector<ProcessedEntry> processed_synthetic(const SyntheticProfile& profile, std::size_t users,
                                                       std::uint64_t seed) {
  return preprocess_dataset(generate_synthetic_corpus(profile, users, seed), PreprocessConfig{}).entries;
}

// Removed at exit unless RISKCLS_KEEP_SCRATCH is set.
struct ScratchDirs {
  std::vector<std::filesystem::path> dirs;
  ~ScratchDirs() {
    if (std::getenv("RISKCLS_KEEP_SCRATCH")) return;
    std::error_code ec;
    for (const auto& d : dirs) std::filesystem::remove_all(d, ec);
  }
};

// Per process, so ctest -j can run test cases side by side.
inline std::filesystem::path scratch_dir(const std::string& name) {
  static ScratchDirs registry;
  auto dir = std::filesystem::temp_directory_path() / ("riskcls_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  registry.dirs.push_back(dir);
  return dir;
}

}  // namespace riskcls::testkit
