#include "riskcls/views.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "riskcls/errors.hpp"
#include "riskcls/rng.hpp"

namespace riskcls {

std::string_view view_kind_name(ViewKind kind) noexcept {
  switch (kind) {
    case ViewKind::WordMask: return "word_mask";
    case ViewKind::SentMask: return "sent_mask";
    case ViewKind::BegEd: return "beg_ed";
    case ViewKind::KSum: return "k_sum";
  }
  return "unknown";
}

ViewKind parse_view_kind(std::string_view text) {
  for (auto k : {ViewKind::WordMask, ViewKind::SentMask, ViewKind::BegEd, ViewKind::KSum}) {
    if (view_kind_name(k) == text) return k;
  }
  throw ValidationError("unknown view kind '" + std::string(text) + "'");
}

void ViewStrategy::validate() const {
  if ((kind == ViewKind::WordMask || kind == ViewKind::SentMask) && !(mask_rate > 0.0 && mask_rate < 1.0)) {
    throw ValidationError("view.mask_rate must lie strictly between 0 and 1");
  }
  if (kind == ViewKind::KSum && k == 0) throw ValidationError("view.k must be at least 1");
}

std::size_t masked_count(double rate, std::size_t n) {
  // The slack keeps decimal rates such as 0.15 from flooring one short.
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) * (1.0 + 1e-12)));
}

Passage word_mask(const Passage& passage, double rate, std::uint64_t seed) {
  Passage out = passage;
  Rng rng(seed);
  for (auto& s : out.sentences) {
    for (auto pos : sample_without_replacement(rng, s.tokens.size(), masked_count(rate, s.tokens.size()))) {
      s.tokens[pos] = std::string(kMaskToken);
    }
  }
  return out;
}

Passage sent_mask_passage(const Passage& passage, double rate, std::uint64_t seed) {
  Passage out = passage;
  Rng rng(seed);
  for (auto idx : sample_without_replacement(rng, out.sentences.size(), masked_count(rate, out.sentences.size()))) {
    for (auto& t : out.sentences[idx].tokens) t = std::string(kMaskToken);
  }
  return out;
}

PerturbedUser sent_mask(const ProcessedUser& user, double rate, std::uint64_t seed) {
  return perturb_user(user, ViewStrategy{ViewKind::SentMask, rate, 5}, {}, seed);
}

Passage beg_ed(const Passage& passage) {
  if (passage.sentences.size() <= 2) return passage;
  Passage out;
  out.origin_post_id = passage.origin_post_id;
  out.sentences = {passage.sentences.front(), passage.sentences.back()};
  return out;
}

Passage k_sum(const Passage& passage, std::size_t k, const SentenceEncoder& encoder, std::uint64_t seed) {
  if (k == 0) throw ValidationError("k_sum requires k >= 1");
  const std::size_t m = passage.sentences.size();
  if (m <= k) return passage;
  if (!encoder) throw ValidationError("k_sum requires a sentence encoder");

  std::vector<Eigen::VectorXd> vectors;
  vectors.reserve(m);
  for (const auto& s : passage.sentences) vectors.push_back(encoder(s));
  auto km = kmeans(vectors, k, kKMeansMaxIters, seed);

  std::vector<bool> taken(m, false);
  std::vector<std::size_t> order(m);
  for (const auto& c : km.centroids) {
    std::vector<double> dist(m);
    for (std::size_t i = 0; i < m; ++i) dist[i] = (vectors[i] - c).squaredNorm();
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });
    for (auto i : order) {
      if (!taken[i]) {
        taken[i] = true;
        break;
      }
    }
  }
  Passage out;
  out.origin_post_id = passage.origin_post_id;
  for (std::size_t i = 0; i < m; ++i) {
    if (taken[i]) out.sentences.push_back(passage.sentences[i]);
  }
  return out;
}

PerturbedUser perturb_user(const ProcessedUser& user, const ViewStrategy& strategy, const SentenceEncoder& encoder,
                           std::uint64_t seed) {
  strategy.validate();
  PerturbedUser out{user.user_id, {}, strategy, seed};
  out.passages.reserve(user.passages.size());
  for (std::size_t i = 0; i < user.passages.size(); ++i) {
    const auto& p = user.passages[i];
    const auto s = derive_seed(seed, i);
    switch (strategy.kind) {
      case ViewKind::WordMask: out.passages.push_back(word_mask(p, strategy.mask_rate, s)); break;
      case ViewKind::SentMask: out.passages.push_back(sent_mask_passage(p, strategy.mask_rate, s)); break;
      case ViewKind::BegEd: out.passages.push_back(beg_ed(p)); break;
      case ViewKind::KSum: out.passages.push_back(k_sum(p, strategy.k, encoder, s)); break;
    }
  }
  return out;
}

}  // namespace riskcls
