#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskcls/encoder.hpp"
#include "riskcls/risk_level.hpp"

namespace riskcls {

using Logits = std::array<double, kNumRiskLevels>;

struct ProbDist {
  std::array<double, kNumRiskLevels> probs{};

  static ProbDist from_logits(const Logits& logits);
  // Entries >= 0 and summing to 1 within tol.
  bool valid(double tol = 1e-9) const;
  bool operator==(const ProbDist&) const = default;
};

// Softmax head over the mean-pooled user embedding.
struct ClassifierParams {
  Matrix weight;  // 4 x d
  Matrix bias;    // 1 x 4

  static ClassifierParams zeros(std::size_t dim);
  static ClassifierParams initialize(std::size_t dim, std::uint64_t seed);

  std::vector<Matrix*> tensors() { return {&weight, &bias}; }
  std::vector<const Matrix*> tensors() const { return {&weight, &bias}; }
  std::vector<std::string> tensor_names() const { return {"classifier.weight", "classifier.bias"}; }
  void set_zero();

  Logits logits(const Embedding& user) const;
};

Logits log_softmax(const Logits& z);

// -ln p[label].
double clf_loss(const ProbDist& p, RiskLevel label);
// Same loss from logits through log-sum-exp.
double clf_loss(const Logits& z, RiskLevel label);
// d loss / d z = softmax(z) - onehot(label).
Logits clf_loss_grad(const Logits& z, RiskLevel label);

// KL(complete || perturbed). The complete-view distribution is a fixed
// target; gradients flow only into the perturbed branch.
double kl_consistency_loss(const ProbDist& complete, const ProbDist& perturbed);
double kl_consistency_loss(const Logits& complete, const Logits& perturbed);
// d KL / d perturbed-logits = softmax(perturbed) - softmax(complete).
Logits kl_consistency_grad(const Logits& complete, const Logits& perturbed);

// Argmax; exact ties go to the higher risk level.
RiskLevel argmax_risk(const ProbDist& p);
RiskLevel argmax_risk(const Logits& z);

// Everything needed to score users: vocabulary, encoder and head.
struct Model {
  Vocabulary vocab;
  EncoderParams encoder;
  ClassifierParams classifier;
};

struct UserTrace {
  std::vector<EncoderTrace> passages;
  Embedding user;
  Logits logits{};
};

UserTrace forward_user(const EncoderParams& encoder, const ClassifierParams& clf, std::span<const Passage> passages,
                       const Vocabulary& vocab);

// Accumulates gradients of a loss with d(loss)/d(logits) = d_logits.
void backward_user(const EncoderParams& encoder, const ClassifierParams& clf, const UserTrace& trace,
                   const Logits& d_logits, EncoderParams& encoder_grads, ClassifierParams& clf_grads);

// softmax(W u + b) with u the mean of the passage embeddings. Throws on a
// user without passages.
ProbDist classify_user(const EncoderParams& encoder, const ClassifierParams& clf, const ProcessedUser& user,
                       const Vocabulary& vocab);

}  // namespace riskcls
