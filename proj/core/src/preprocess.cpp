#include "riskcls/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <regex>

#include <json.hpp>

#include "riskcls/errors.hpp"
#include "riskcls/rng.hpp"

namespace riskcls {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

const std::regex& url_pattern() {
  static const std::regex re(R"((?:https?://|www\.)\S+)", std::regex::icase | std::regex::optimize);
  return re;
}

}  // namespace

bool is_sentinel(std::string_view token) noexcept {
  return token == kUrlToken || token == kPersonToken || token == kMaskToken || token == kUnknownToken ||
         token == kPadToken;
}

std::size_t Passage::word_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.word_count();
  return n;
}

std::vector<std::string> Passage::tokens() const {
  std::vector<std::string> out;
  out.reserve(word_count());
  for (const auto& s : sentences) out.insert(out.end(), s.tokens.begin(), s.tokens.end());
  return out;
}

std::vector<std::string> normalize_text(std::string_view raw, const WordSet& stopwords, const WordSet& names) {
  const std::string replaced =
      std::regex_replace(std::string(raw), url_pattern(), " " + std::string(kUrlToken) + " ");

  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < replaced.size()) {
    while (i < replaced.size() && is_space(replaced[i])) ++i;
    std::size_t j = i;
    while (j < replaced.size() && !is_space(replaced[j])) ++j;
    if (j == i) break;
    std::string_view raw_token(replaced.data() + i, j - i);
    i = j;

    // Sentinels survive punctuation stripping, e.g. "_PERSON_'s".
    if (raw_token.find(kUrlToken) != std::string_view::npos) {
      out.emplace_back(kUrlToken);
      continue;
    }
    if (raw_token.find(kPersonToken) != std::string_view::npos) {
      out.emplace_back(kPersonToken);
      continue;
    }
    std::string word;
    word.reserve(raw_token.size());
    for (char c : raw_token) {
      if (!is_punct(c)) word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (word.empty()) continue;
    if (names.contains(word)) {
      out.emplace_back(kPersonToken);
    } else if (!stopwords.contains(word)) {
      out.push_back(std::move(word));
    }
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view raw, const WordSet& abbreviations) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 < raw.size() && !is_space(raw[i + 1])) continue;
    if (c == '.') {
      std::size_t w = i;
      while (w > start && !is_space(raw[w - 1])) --w;
      auto word = raw.substr(w, i + 1 - w);
      while (!word.empty() && !std::isalnum(static_cast<unsigned char>(word.front()))) word.remove_prefix(1);
      if (abbreviations.contains(lowercase(word))) continue;
    }
    auto sentence = trim(raw.substr(start, i + 1 - start));
    if (!sentence.empty()) out.emplace_back(sentence);
    start = i + 1;
  }
  auto rest = trim(raw.substr(std::min(start, raw.size())));
  if (!rest.empty()) out.emplace_back(rest);
  return out;
}

std::vector<std::string> split_sentences(std::string_view raw) {
  return split_sentences(raw, Lexicons::builtin().abbreviations);
}

std::vector<Passage> chunk_passages(std::span<const Sentence> sentences, std::size_t max_len,
                                    const std::string& origin_post_id) {
  if (max_len == 0) throw ValidationError("max_passage_len must be at least 1");
  std::vector<Passage> out;
  Passage stack;
  stack.origin_post_id = origin_post_id;
  std::size_t stack_words = 0;
  auto flush = [&] {
    if (stack.sentences.empty()) return;
    out.push_back(std::move(stack));
    stack = Passage{};
    stack.origin_post_id = origin_post_id;
    stack_words = 0;
  };
  for (const auto& s : sentences) {
    if (stack_words + s.word_count() > max_len) flush();
    stack.sentences.push_back(s);
    stack_words += s.word_count();
  }
  flush();
  return out;
}

std::vector<Passage> cap_passages(std::span<const Passage> passages, std::size_t cap, std::uint64_t seed) {
  if (cap == 0) throw ValidationError("passage cap must be at least 1");
  if (passages.size() <= cap) return {passages.begin(), passages.end()};
  Rng rng(seed);
  std::vector<Passage> out;
  out.reserve(cap);
  for (auto i : sample_sorted(rng, passages.size(), cap)) out.push_back(passages[i]);
  return out;
}

std::vector<Sentence> post_sentences(const PostRecord& post, const PreprocessConfig& config) {
  const auto& lex = config.lex();
  std::vector<Sentence> out;
  for (std::string_view text : {std::string_view(post.title), std::string_view(post.body)}) {
    for (const auto& raw : split_sentences(text, lex.abbreviations)) {
      Sentence s{normalize_text(raw, lex.stopwords, lex.names)};
      if (!s.tokens.empty()) out.push_back(std::move(s));
    }
  }
  return out;
}

ProcessedUser preprocess_user(const UserRecord& user, const PreprocessConfig& config) {
  ProcessedUser out;
  out.user_id = user.user_id;
  std::vector<Passage> all;
  for (const auto& post : user.posts) {
    auto sentences = post_sentences(post, config);
    auto passages = chunk_passages(sentences, config.max_passage_len, post.post_id);
    all.insert(all.end(), std::make_move_iterator(passages.begin()), std::make_move_iterator(passages.end()));
  }
  if (all.empty()) throw EmptyAfterPreprocessing(user.user_id);
  out.passages = cap_passages(all, config.passage_cap, derive_seed(config.seed, stable_hash(user.user_id)));
  return out;
}

ProcessedCorpus preprocess_dataset(const LabeledDataset& dataset, const PreprocessConfig& config) {
  ProcessedCorpus out;
  out.entries.reserve(dataset.size());
  for (const auto& e : dataset.entries()) {
    try {
      out.entries.push_back(ProcessedEntry{preprocess_user(e.user, config), e.label, e.provenance});
    } catch (const EmptyAfterPreprocessing& err) {
      out.dropped_users.push_back(err.user_id());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Processed JSONL

void write_processed(const std::vector<ProcessedEntry>& entries, std::ostream& out) {
  using nlohmann::json;
  for (const auto& e : entries) {
    json j;
    j["user_id"] = e.user.user_id;
    if (e.label) j["label"] = std::string(1, risk_level_letter(*e.label));
    if (e.provenance != Provenance::Gold) j["provenance"] = std::string(provenance_name(e.provenance));
    json passages = json::array();
    for (const auto& p : e.user.passages) {
      json sentences = json::array();
      for (const auto& s : p.sentences) sentences.push_back(s.tokens);
      passages.push_back(json{{"post_id", p.origin_post_id}, {"sentences", std::move(sentences)}});
    }
    j["passages"] = std::move(passages);
    out << j.dump() << '\n';
  }
}

std::vector<ProcessedEntry> parse_processed(std::istream& in, const std::string& source_name) {
  using nlohmann::json;
  std::vector<ProcessedEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      ProcessedEntry e;
      e.user.user_id = j.at("user_id").get<std::string>();
      if (auto it = j.find("label"); it != j.end() && !it->is_null()) e.label = parse_risk_level(it->get<std::string>());
      if (auto it = j.find("provenance"); it != j.end()) e.provenance = parse_provenance(it->get<std::string>());
      for (const auto& jp : j.at("passages")) {
        Passage p;
        p.origin_post_id = jp.value("post_id", std::string{});
        for (const auto& js : jp.at("sentences")) {
          Sentence s{js.get<std::vector<std::string>>()};
          if (s.tokens.empty()) throw ValidationError("empty sentence");
          p.sentences.push_back(std::move(s));
        }
        e.user.passages.push_back(std::move(p));
      }
      out.push_back(std::move(e));
    } catch (const json::exception& err) {
      throw ParseError(source_name, line_no, err.what());
    } catch (const ValidationError& err) {
      throw ParseError(source_name, line_no, err.what());
    }
  }
  return out;
}

}  // namespace riskcls
