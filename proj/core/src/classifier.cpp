#include "riskcls/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "riskcls/errors.hpp"
#include "riskcls/rng.hpp"

namespace riskcls {

namespace {

double log_sum_exp(const Logits& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - mx);
  return mx + std::log(s);
}

Logits softmax(const Logits& z) {
  const double lse = log_sum_exp(z);
  Logits p;
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - lse);
  return p;
}

}  // namespace

ProbDist ProbDist::from_logits(const Logits& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  ProbDist p;
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) s += (p.probs[i] = std::exp(logits[i] - mx));
  for (auto& v : p.probs) v /= s;
  return p;
}

bool ProbDist::valid(double tol) const {
  double s = 0.0;
  for (double v : probs) {
    if (!(v >= 0.0)) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= tol;
}

ClassifierParams ClassifierParams::zeros(std::size_t dim) {
  return {Matrix::Zero(kNumRiskLevels, static_cast<Eigen::Index>(dim)), Matrix::Zero(1, kNumRiskLevels)};
}

ClassifierParams ClassifierParams::initialize(std::size_t dim, std::uint64_t seed) {
  auto p = zeros(dim);
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, 0.02);
  for (Eigen::Index i = 0; i < p.weight.size(); ++i) p.weight.data()[i] = dist(rng);
  return p;
}

void ClassifierParams::set_zero() {
  weight.setZero();
  bias.setZero();
}

Logits ClassifierParams::logits(const Embedding& user) const {
  Eigen::VectorXd z = weight * user + bias.row(0).transpose();
  Logits out;
  for (std::size_t i = 0; i < kNumRiskLevels; ++i) out[i] = z(static_cast<Eigen::Index>(i));
  return out;
}

Logits log_softmax(const Logits& z) {
  const double lse = log_sum_exp(z);
  Logits out;
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - lse;
  return out;
}

double clf_loss(const ProbDist& p, RiskLevel label) { return -std::log(p.probs[index_of(label)]); }

double clf_loss(const Logits& z, RiskLevel label) { return log_sum_exp(z) - z[index_of(label)]; }

Logits clf_loss_grad(const Logits& z, RiskLevel label) {
  auto g = softmax(z);
  g[index_of(label)] -= 1.0;
  return g;
}

double kl_consistency_loss(const ProbDist& complete, const ProbDist& perturbed) {
  double kl = 0.0;
  for (std::size_t i = 0; i < kNumRiskLevels; ++i) {
    const double p = complete.probs[i];
    if (p > 0.0) kl += p * (std::log(p) - std::log(perturbed.probs[i]));
  }
  return std::max(0.0, kl);
}

double kl_consistency_loss(const Logits& complete, const Logits& perturbed) {
  const auto lc = log_softmax(complete);
  const auto lp = log_softmax(perturbed);
  double kl = 0.0;
  for (std::size_t i = 0; i < kNumRiskLevels; ++i) kl += std::exp(lc[i]) * (lc[i] - lp[i]);
  return std::max(0.0, kl);
}

Logits kl_consistency_grad(const Logits& complete, const Logits& perturbed) {
  const auto pc = softmax(complete);
  auto g = softmax(perturbed);
  for (std::size_t i = 0; i < kNumRiskLevels; ++i) g[i] -= pc[i];
  return g;
}

RiskLevel argmax_risk(const ProbDist& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumRiskLevels; ++i) {
    if (p.probs[i] >= p.probs[best]) best = i;
  }
  return risk_level_at(best);
}

RiskLevel argmax_risk(const Logits& z) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumRiskLevels; ++i) {
    if (z[i] >= z[best]) best = i;
  }
  return risk_level_at(best);
}

UserTrace forward_user(const EncoderParams& encoder, const ClassifierParams& clf, std::span<const Passage> passages,
                       const Vocabulary& vocab) {
  if (passages.empty()) throw ValidationError("cannot classify a user without passages");
  UserTrace t;
  t.passages.reserve(passages.size());
  t.user = Embedding::Zero(static_cast<Eigen::Index>(encoder.config.dim));
  for (const auto& p : passages) {
    t.passages.push_back(encoder_forward(encoder, vocab.encode(p, encoder.config.max_len)));
    t.user += t.passages.back().pooled();
  }
  t.user /= static_cast<double>(passages.size());
  t.logits = clf.logits(t.user);
  return t;
}

void backward_user(const EncoderParams& encoder, const ClassifierParams& clf, const UserTrace& trace,
                   const Logits& d_logits, EncoderParams& encoder_grads, ClassifierParams& clf_grads) {
  Eigen::Map<const Eigen::VectorXd> dz(d_logits.data(), kNumRiskLevels);
  clf_grads.weight += dz * trace.user.transpose();
  clf_grads.bias += dz.transpose();
  const Embedding d_user = clf.weight.transpose() * dz;
  const Embedding d_passage = d_user / static_cast<double>(trace.passages.size());
  for (const auto& pt : trace.passages) {
    encoder_backward(encoder, pt, pooled_gradient(pt, d_passage), encoder_grads);
  }
}

ProbDist classify_user(const EncoderParams& encoder, const ClassifierParams& clf, const ProcessedUser& user,
                       const Vocabulary& vocab) {
  return ProbDist::from_logits(forward_user(encoder, clf, user.passages, vocab).logits);
}

}  // namespace riskcls
