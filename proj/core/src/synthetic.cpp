#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "riskcls/corpus.hpp"
#include "riskcls/errors.hpp"
#include "riskcls/rng.hpp"

namespace riskcls {

namespace {

constexpr std::array<const char*, 16> kSyllables = {"ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo",
                                                    "ze", "pu", "da", "fe", "gi", "ho", "ju", "bre"};

// Three-syllable pseudo-word, unique per index below 16^3.
std::string pseudo_word(std::size_t index) {
  const std::size_t s = kSyllables.size();
  std::string w;
  w += kSyllables[index % s];
  w += kSyllables[(index / s) % s];
  w += kSyllables[(index / (s * s)) % s];
  return w;
}

void validate(const SyntheticProfile& p) {
  if (p.vocabulary.empty()) throw ValidationError("synthetic profile has an empty vocabulary");
  for (const auto& row : p.class_weights) {
    if (row.size() != p.vocabulary.size()) {
      throw ValidationError("synthetic profile class weights do not match the vocabulary size");
    }
    if (std::accumulate(row.begin(), row.end(), 0.0) <= 0.0) {
      throw ValidationError("synthetic profile has a class with no token mass");
    }
  }
  if (p.min_posts == 0 || p.min_posts > p.max_posts || p.min_sentences == 0 ||
      p.min_sentences > p.max_sentences || p.min_words == 0 || p.min_words > p.max_words) {
    throw ValidationError("synthetic profile has invalid length ranges");
  }
}

std::size_t in_range(Rng& rng, std::size_t lo, std::size_t hi) { return lo + uniform_index(rng, hi - lo + 1); }

class UserWriter {
 public:
  explicit UserWriter(const SyntheticProfile& profile) : profile_(profile) {
    for (std::size_t c = 0; c < kNumRiskLevels; ++c) {
      const auto& w = profile.class_weights[c];
      dists_[c] = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    }
  }

  UserRecord write(const std::string& user_id, RiskLevel like, Rng& rng) {
    UserRecord user;
    user.user_id = user_id;
    const std::size_t n_posts = in_range(rng, profile_.min_posts, profile_.max_posts);
    for (std::size_t k = 0; k < n_posts; ++k) {
      PostRecord post;
      post.post_id = user_id + "_p" + std::to_string(k);
      post.subreddit = profile_.subreddit;
      post.timestamp = 1546300800 + static_cast<std::int64_t>(k) * 3600;
      post.title = words(like, in_range(rng, 1, 4), rng);
      const std::size_t n_sent = in_range(rng, profile_.min_sentences, profile_.max_sentences);
      for (std::size_t s = 0; s < n_sent; ++s) {
        if (s) post.body += ' ';
        auto sentence = words(like, in_range(rng, profile_.min_words, profile_.max_words), rng);
        sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
        post.body += sentence;
        static constexpr char kEnds[] = {'.', '.', '.', '!', '?'};
        post.body += kEnds[uniform_index(rng, sizeof(kEnds))];
      }
      user.posts.push_back(std::move(post));
    }
    return user;
  }

 private:
  std::string words(RiskLevel like, std::size_t n, Rng& rng) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += ' ';
      out += profile_.vocabulary[dists_[index_of(like)](rng)];
    }
    return out;
  }

  const SyntheticProfile& profile_;
  std::array<std::discrete_distribution<std::size_t>, kNumRiskLevels> dists_;
};

}  // namespace

SyntheticProfile make_separable_profile(std::size_t shared_words, std::size_t class_words, double class_word_share) {
  if (!(class_word_share >= 0.0 && class_word_share <= 1.0)) {
    throw ValidationError("class_word_share must lie in [0, 1]");
  }
  if (shared_words + kNumRiskLevels * class_words > 4096) {
    throw ValidationError("synthetic vocabulary too large");
  }
  if (class_words == 0 && class_word_share > 0.0) throw ValidationError("class_word_share > 0 needs class words");
  if (shared_words == 0 && class_word_share < 1.0) throw ValidationError("class_word_share < 1 needs shared words");

  SyntheticProfile p;
  const std::size_t vocab = shared_words + kNumRiskLevels * class_words;
  for (std::size_t i = 0; i < vocab; ++i) p.vocabulary.push_back(pseudo_word(i));

  // Zipf-like mass inside each block.
  auto zipf_block = [](std::size_t n) {
    std::vector<double> w(n);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) total += (w[r] = 1.0 / static_cast<double>(r + 1));
    for (auto& x : w) x /= total;
    return w;
  };
  const auto shared = zipf_block(shared_words);
  const auto specific = zipf_block(class_words);
  for (std::size_t c = 0; c < kNumRiskLevels; ++c) {
    auto& row = p.class_weights[c];
    row.assign(vocab, 0.0);
    for (std::size_t i = 0; i < shared_words; ++i) row[i] = (1.0 - class_word_share) * shared[i];
    for (std::size_t i = 0; i < class_words; ++i) row[shared_words + c * class_words + i] = class_word_share * specific[i];
  }
  return p;
}

LabeledDataset generate_synthetic_corpus(const SyntheticProfile& profile, std::size_t n_users, std::uint64_t seed) {
  validate(profile);
  // Exact class counts by largest remainder over the proportions.
  std::array<std::size_t, kNumRiskLevels> counts{};
  {
    double total = 0.0;
    for (double w : profile.class_proportions) {
      if (!(w >= 0.0)) throw ValidationError("class proportions must be non-negative");
      total += w;
    }
    if (total <= 0.0) throw ValidationError("class proportions sum to zero");
    std::array<double, kNumRiskLevels> rem{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < kNumRiskLevels; ++c) {
      double q = static_cast<double>(n_users) * profile.class_proportions[c] / total;
      counts[c] = static_cast<std::size_t>(std::floor(q));
      rem[c] = q - std::floor(q);
      assigned += counts[c];
    }
    std::array<std::size_t, kNumRiskLevels> order{0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < n_users; ++k, ++assigned) ++counts[order[k % kNumRiskLevels]];
  }
  std::vector<RiskLevel> labels;
  labels.reserve(n_users);
  for (std::size_t c = 0; c < kNumRiskLevels; ++c) labels.insert(labels.end(), counts[c], risk_level_at(c));

  Rng rng(seed);
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[uniform_index(rng, i)]);

  UserWriter writer(profile);
  std::vector<DatasetEntry> entries;
  entries.reserve(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    DatasetEntry e;
    e.user = writer.write(profile.user_prefix + std::to_string(u), labels[u], rng);
    if (profile.emit_labels) e.label = labels[u];
    e.provenance = profile.provenance;
    entries.push_back(std::move(e));
  }
  return LabeledDataset(std::move(entries));
}

LabeledDataset generate_class_corpus(const SyntheticProfile& profile, RiskLevel like, std::size_t n_users,
                                     std::uint64_t seed) {
  validate(profile);
  Rng rng(seed);
  UserWriter writer(profile);
  std::vector<DatasetEntry> entries;
  entries.reserve(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    DatasetEntry e;
    e.user = writer.write(profile.user_prefix + std::to_string(u), like, rng);
    if (profile.emit_labels) e.label = like;
    e.provenance = profile.provenance;
    entries.push_back(std::move(e));
  }
  return LabeledDataset(std::move(entries));
}

}  // namespace riskcls
