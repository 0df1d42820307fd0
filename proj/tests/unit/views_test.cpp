#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "riskcls/errors.hpp"
#include "riskcls/views.hpp"

using namespace riskcls;
using riskcls::testkit::passage_of;

namespace {

std::size_t masks_in(const Sentence& s) {
  return static_cast<std::size_t>(std::count(s.tokens.begin(), s.tokens.end(), std::string(kMaskToken)));
}

bool fully_masked(const Sentence& s) { return masks_in(s) == s.tokens.size(); }

Eigen::VectorXd point(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}

// Sentence "v<i>" sits at 1-D coordinate i.
Passage line_passage(std::size_t m) {
  Passage p;
  for (std::size_t i = 0; i < m; ++i) p.sentences.push_back(Sentence{{"v" + std::to_string(i)}});
  return p;
}

Eigen::VectorXd line_encoder(const Sentence& s) { return point(std::stod(s.tokens.at(0).substr(1))); }

}  // namespace

TEST(MaskedCount, FloorOfRate) {
  EXPECT_EQ(masked_count(0.1, 10), 1u);
  EXPECT_EQ(masked_count(0.1, 5), 0u);
  EXPECT_EQ(masked_count(0.29, 100), 29u);  // 0.29 * 100 is 28.999999999999996 in binary
  EXPECT_EQ(masked_count(0.1, 20), 2u);
  EXPECT_EQ(masked_count(0.15, 20), 3u);
  EXPECT_EQ(masked_count(0.5, 4), 2u);
  for (std::size_t n = 0; n < 2000; ++n) {
    EXPECT_EQ(masked_count(0.1, n), oracle::floor_rate(1, 10, n));
    EXPECT_EQ(masked_count(0.15, n), oracle::floor_rate(15, 100, n));
    EXPECT_EQ(masked_count(0.3, n), oracle::floor_rate(3, 10, n));
  }
}

TEST(WordMask, ExactCounts) {
  EXPECT_EQ(masks_in(word_mask(passage_of({10}), 0.1, 1).sentences[0]), 1u);
  EXPECT_EQ(masks_in(word_mask(passage_of({5}), 0.1, 1).sentences[0]), 0u);
  const auto a = word_mask(passage_of({20}), 0.1, 1);
  const auto b = word_mask(passage_of({20}), 0.1, 2);
  EXPECT_EQ(masks_in(a.sentences[0]), 2u);
  EXPECT_EQ(masks_in(b.sentences[0]), 2u);
  EXPECT_NE(a, b);
}

TEST(WordMask, EveryTenTokenSentenceGetsOneMask) {
  ProcessedUser user{"u", std::vector<Passage>(7, passage_of({10, 10, 10}))};
  const auto view = perturb_user(user, ViewStrategy{ViewKind::WordMask, 0.1, 5}, {}, 3);
  ASSERT_EQ(view.passages.size(), 7u);
  for (const auto& p : view.passages) {
    for (const auto& s : p.sentences) EXPECT_EQ(masks_in(s), 1u);
  }
  EXPECT_EQ(view, perturb_user(user, ViewStrategy{ViewKind::WordMask, 0.1, 5}, {}, 3));
}

TEST(SentMask, ExactCounts) {
  auto count_masked = [](const Passage& p) {
    return std::count_if(p.sentences.begin(), p.sentences.end(), fully_masked);
  };
  EXPECT_EQ(count_masked(sent_mask_passage(passage_of(std::vector<std::size_t>(10, 4)), 0.1, 9)), 1);
  const auto three = passage_of({4, 4, 4});
  EXPECT_EQ(sent_mask_passage(three, 0.1, 9), three);
  EXPECT_EQ(count_masked(sent_mask_passage(passage_of({3, 3, 3, 3}), 0.5, 9)), 2);
}

TEST(BegEd, FirstAndLast) {
  const auto four = passage_of({1, 2, 3, 4});
  const auto out = beg_ed(four);
  ASSERT_EQ(out.sentences.size(), 2u);
  EXPECT_EQ(out.sentences[0], four.sentences[0]);
  EXPECT_EQ(out.sentences[1], four.sentences[3]);
  EXPECT_EQ(beg_ed(passage_of({5})), passage_of({5}));
  EXPECT_EQ(beg_ed(passage_of({5, 6})), passage_of({5, 6}));
  ProcessedUser singles{"u", {passage_of({3}), passage_of({7})}};
  EXPECT_EQ(perturb_user(singles, ViewStrategy{ViewKind::BegEd}, {}, 1).passages, singles.passages);
}

TEST(KMeans, TwoClustersOnALine) {
  const std::vector<Eigen::VectorXd> pts{point(0), point(0.1), point(10), point(10.1)};
  const auto r = kmeans(pts, 2, 100, 1);
  std::vector<double> c{r.centroids[0][0], r.centroids[1][0]};
  std::sort(c.begin(), c.end());
  EXPECT_NEAR(c[0], 0.05, 1e-12);
  EXPECT_NEAR(c[1], 10.05, 1e-12);
  EXPECT_EQ(r.assignments[0], r.assignments[1]);
  EXPECT_EQ(r.assignments[2], r.assignments[3]);
  EXPECT_NE(r.assignments[0], r.assignments[2]);
}

TEST(KMeans, DegenerateCases) {
  const std::vector<Eigen::VectorXd> pts{point(1), point(2), point(3)};
  EXPECT_DOUBLE_EQ(kmeans(pts, 3, 100, 1).inertia(), 0.0);
  const std::vector<Eigen::VectorXd> same(5, point(4.0));
  const auto r = kmeans(same, 1, 100, 1);
  EXPECT_DOUBLE_EQ(r.centroids[0][0], 4.0);
  EXPECT_DOUBLE_EQ(r.inertia(), 0.0);
  Eigen::VectorXd two(2);
  two << 1, 2;
  const std::vector<Eigen::VectorXd> mixed{point(1), two};
  EXPECT_THROW(kmeans(mixed, 1, 10, 1), ValidationError);
}

TEST(KMeans, InertiaNeverIncreases) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng() % 40, dim = 1 + rng() % 4, k = 1 + rng() % 5;
    std::vector<Eigen::VectorXd> pts(n, Eigen::VectorXd(dim));
    for (auto& p : pts) for (Eigen::Index j = 0; j < p.size(); ++j) p[j] = gauss(rng);
    const auto r = kmeans(pts, k, 100, rng());
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      EXPECT_LE(r.inertia_history[i], r.inertia_history[i - 1]);
    }
  }
}

TEST(KSum, ShortPassageUnchanged) {
  const auto four = line_passage(4);
  EXPECT_EQ(k_sum(four, 5, line_encoder, 1), four);
}

TEST(KSum, PicksSentencesNearestOptimalMeans) {
  // Two well-separated groups: Lloyd has a single fixpoint, the optimal one.
  Passage passage;
  std::vector<double> xs;
  for (int x : {0, 1, 2, 3, 4, 100, 101, 102, 103, 104}) {
    passage.sentences.push_back(Sentence{{"v" + std::to_string(x)}});
    xs.push_back(x);
  }
  const auto [m1, m2] = oracle::best_two_means_1d(xs);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto out = k_sum(passage, 2, line_encoder, seed);
    ASSERT_EQ(out.sentences.size(), 2u);
    EXPECT_DOUBLE_EQ(line_encoder(out.sentences[0])[0], m1);
    EXPECT_DOUBLE_EQ(line_encoder(out.sentences[1])[0], m2);
  }
}

TEST(KSum, PicksSentencesNearestReturnedCentroids) {
  // Evenly spaced points have tied fixpoints; whichever one Lloyd reaches,
  // each centroid gets its nearest sentence (lowest index on ties).
  const auto passage = line_passage(10);
  std::vector<Eigen::VectorXd> pts;
  for (const auto& s : passage.sentences) pts.push_back(line_encoder(s));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto km = kmeans(pts, 2, kKMeansMaxIters, seed);
    std::set<std::size_t> expected;
    for (const auto& c : km.centroids) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < pts.size(); ++i) {
        if ((pts[i] - c).squaredNorm() < (pts[best] - c).squaredNorm()) best = i;
      }
      expected.insert(best);
    }
    const auto out = k_sum(passage, 2, line_encoder, seed);
    std::set<std::size_t> picked;
    for (const auto& s : out.sentences) picked.insert(static_cast<std::size_t>(line_encoder(s)[0]));
    EXPECT_EQ(picked, expected) << "seed " << seed;
  }
}

TEST(KSum, IdenticalEmbeddingsDeterministicInOrder) {
  const auto passage = line_passage(6);
  const auto flat = [](const Sentence&) { return point(1.0); };
  const auto a = k_sum(passage, 2, flat, 4);
  EXPECT_EQ(a.sentences.size(), 2u);
  EXPECT_TRUE(oracle::is_subsequence(a.sentences, passage.sentences));
  EXPECT_EQ(a, k_sum(passage, 2, flat, 4));
}

TEST(Views, OrderPreservingSubsequences) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto user = testkit::random_user(rng, "u", 50, 4, 12, 6);
    const auto hash_encoder = [](const Sentence& s) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
      for (const auto& t : s.tokens) v[static_cast<Eigen::Index>(std::hash<std::string>{}(t) % 3)] += 1.0;
      return v;
    };
    for (auto kind : {ViewKind::BegEd, ViewKind::KSum}) {
      const ViewStrategy strategy{kind, 0.1, 5};
      const auto view = perturb_user(user, strategy, hash_encoder, trial);
      ASSERT_EQ(view.passages.size(), user.passages.size());
      for (std::size_t i = 0; i < user.passages.size(); ++i) {
        const auto& in = user.passages[i].sentences;
        const auto& out = view.passages[i].sentences;
        EXPECT_TRUE(oracle::is_subsequence(out, in));
        if (kind == ViewKind::KSum) EXPECT_EQ(out.size(), std::min<std::size_t>(5, in.size()));
      }
      EXPECT_EQ(view, perturb_user(user, strategy, hash_encoder, trial));
    }
  }
}

TEST(ViewStrategy, Validation) {
  EXPECT_THROW((ViewStrategy{ViewKind::WordMask, 0.0, 5}.validate()), ValidationError);
  EXPECT_THROW((ViewStrategy{ViewKind::SentMask, 1.0, 5}.validate()), ValidationError);
  EXPECT_THROW((ViewStrategy{ViewKind::KSum, 0.1, 0}.validate()), ValidationError);
  EXPECT_NO_THROW((ViewStrategy{ViewKind::BegEd, 0.1, 5}.validate()));
  EXPECT_EQ(parse_view_kind("k_sum"), ViewKind::KSum);
  EXPECT_EQ(view_kind_name(ViewKind::SentMask), "sent_mask");
  EXPECT_THROW(parse_view_kind("bogus"), ValidationError);
}
