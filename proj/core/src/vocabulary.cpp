#include "riskcls/vocabulary.hpp"

#include <algorithm>

#include "riskcls/errors.hpp"

namespace riskcls {

Vocabulary::Vocabulary() {
  add(std::string(kPadToken));
  add(std::string(kUnknownToken));
  add(std::string(kMaskToken));
  add(std::string(kPersonToken));
  add(std::string(kUrlToken));
}

void Vocabulary::add(std::string token) {
  if (index_.contains(token)) throw ValidationError("duplicate vocabulary token '" + token + "'");
  index_.emplace(token, static_cast<TokenId>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  if (tokens.size() < kNumReserved) throw ValidationError("vocabulary is missing reserved tokens");
  for (std::size_t i = 0; i < kNumReserved; ++i) {
    if (tokens[i] != v.tokens_[i]) throw ValidationError("vocabulary reserved tokens out of order");
  }
  for (std::size_t i = kNumReserved; i < tokens.size(); ++i) v.add(std::move(tokens[i]));
  return v;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.contains(std::string(token)); }

std::vector<TokenId> Vocabulary::encode(const Passage& passage, std::size_t max_len) const {
  std::vector<TokenId> ids;
  ids.reserve(std::min(passage.word_count(), max_len));
  for (const auto& s : passage.sentences) {
    for (const auto& t : s.tokens) {
      if (ids.size() == max_len) return ids;
      ids.push_back(id(t));
    }
  }
  return ids;
}

std::vector<TokenId> Vocabulary::encode(const Sentence& sentence, std::size_t max_len) const {
  std::vector<TokenId> ids;
  for (const auto& t : sentence.tokens) {
    if (ids.size() == max_len) break;
    ids.push_back(id(t));
  }
  return ids;
}

void VocabularyBuilder::add(const Passage& passage) {
  for (const auto& s : passage.sentences) {
    for (const auto& t : s.tokens) ++counts_[t];
  }
}

void VocabularyBuilder::add(const ProcessedUser& user) {
  for (const auto& p : user.passages) add(p);
}

Vocabulary VocabularyBuilder::build(std::size_t min_freq) const {
  std::vector<std::pair<std::string, std::size_t>> items;
  Vocabulary reserved;
  for (const auto& [token, count] : counts_) {
    if (count >= min_freq && !reserved.contains(token)) items.emplace_back(token, count);
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens = reserved.tokens();
  for (auto& [token, count] : items) tokens.push_back(token);
  return Vocabulary::from_tokens(std::move(tokens));
}

Vocabulary build_vocabulary(std::span<const ProcessedUser> corpus, std::size_t min_freq) {
  if (corpus.empty()) throw ValidationError("cannot build a vocabulary from an empty corpus");
  VocabularyBuilder builder;
  for (const auto& u : corpus) builder.add(u);
  return builder.build(min_freq);
}

}  // namespace riskcls
