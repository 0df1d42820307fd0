#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "riskcls/preprocess.hpp"

namespace riskcls {

enum class ViewKind : std::uint8_t { WordMask, SentMask, BegEd, KSum };

std::string_view view_kind_name(ViewKind kind) noexcept;  // word_mask, sent_mask, beg_ed, k_sum
ViewKind parse_view_kind(std::string_view text);

struct ViewStrategy {
  ViewKind kind = ViewKind::WordMask;
  double mask_rate = 0.10;  // WordMask / SentMask
  std::size_t k = 5;        // KSum

  // Throws ValidationError when mask_rate is outside (0, 1) for the
  // masking strategies or k == 0 for KSum.
  void validate() const;
  bool operator==(const ViewStrategy&) const = default;
};

struct PerturbedUser {
  std::string user_id;
  std::vector<Passage> passages;
  ViewStrategy strategy;
  std::uint64_t seed = 0;

  bool operator==(const PerturbedUser&) const = default;
};

// floor(rate * n) masked positions for an n-token sentence.
std::size_t masked_count(double rate, std::size_t n);

// Replaces floor(rate * n) uniformly chosen tokens of every sentence with _MASK_.
Passage word_mask(const Passage& passage, double rate, std::uint64_t seed);

// Masks floor(rate * m) whole sentences of an m-sentence passage.
Passage sent_mask_passage(const Passage& passage, double rate, std::uint64_t seed);
PerturbedUser sent_mask(const ProcessedUser& user, double rate, std::uint64_t seed);

// First and last sentence only.
Passage beg_ed(const Passage& passage);

struct KMeansResult {
  std::vector<Eigen::VectorXd> centroids;
  std::vector<std::size_t> assignments;
  // Inertia after each assignment step, in iteration order.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;

  double inertia() const { return inertia_history.empty() ? 0.0 : inertia_history.back(); }
};

// Lloyd's algorithm with k-means++ seeding. With |points| <= k every point
// is its own centroid. Stops at an assignment fixpoint or after max_iters.
KMeansResult kmeans(std::span<const Eigen::VectorXd> points, std::size_t k, std::size_t max_iters,
                    std::uint64_t seed);

double inertia(std::span<const Eigen::VectorXd> points, std::span<const Eigen::VectorXd> centroids,
               std::span<const std::size_t> assignments);

using SentenceEncoder = std::function<Eigen::VectorXd(const Sentence&)>;

inline constexpr std::size_t kKMeansMaxIters = 100;

// Extractive summary of a passage: one sentence nearest to each of k
// centroids (next-nearest unselected on collision), in passage order.
Passage k_sum(const Passage& passage, std::size_t k, const SentenceEncoder& encoder, std::uint64_t seed);

// Applies the strategy to every passage with a per-passage seed derived
// from `seed`. `encoder` is only used by KSum and may be empty otherwise.
PerturbedUser perturb_user(const ProcessedUser& user, const ViewStrategy& strategy, const SentenceEncoder& encoder,
                           std::uint64_t seed);

}  // namespace riskcls
