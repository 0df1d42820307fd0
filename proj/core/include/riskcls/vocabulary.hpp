#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "riskcls/preprocess.hpp"

namespace riskcls {

using TokenId = int;

// Token <-> id mapping. Ids 0-4 are reserved for the sentinel tokens and
// are always present; unknown tokens resolve to _UNK_.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kMask = 2;
  static constexpr TokenId kPerson = 3;
  static constexpr TokenId kUrl = 4;
  static constexpr std::size_t kNumReserved = 5;

  Vocabulary();

  // Rebuilds a vocabulary from an id-ordered token list (checkpoint load).
  // The list must start with the reserved tokens and contain no duplicates.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  bool contains(std::string_view token) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // Passage tokens as ids, truncated to max_len.
  std::vector<TokenId> encode(const Passage& passage, std::size_t max_len) const;
  std::vector<TokenId> encode(const Sentence& sentence, std::size_t max_len) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Counts token frequencies; ids are assigned by descending frequency with
// ties broken lexicographically.
class VocabularyBuilder {
 public:
  void add(const ProcessedUser& user);
  void add(const Passage& passage);
  Vocabulary build(std::size_t min_freq) const;

 private:
  std::unordered_map<std::string, std::size_t> counts_;
};

Vocabulary build_vocabulary(std::span<const ProcessedUser> corpus, std::size_t min_freq);

}  // namespace riskcls
