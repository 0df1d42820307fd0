#pragma once

// Finite-difference checks of the three training losses on a random tiny
// model. Shared by the unit suite and the acceptance binary.

#include <random>
#include <string>
#include <utility>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "riskcls/trainer.hpp"
#include "riskcls/views.hpp"

namespace riskcls::testkit {

struct TinySetup {
  EncoderConfig config;
  Model model;
  ProcessedUser user;
  std::vector<Passage> perturbed;
  RiskLevel label = RiskLevel::A_NoRisk;
};

// V <= 50, d <= 16, L <= 2.
inline TinySetup tiny_setup(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TinySetup s;
  const std::size_t words = 3 + rng() % 43;
  s.config.vocab_size = Vocabulary::kNumReserved + words;
  s.config.dim = 2 + rng() % 15;
  s.config.layers = rng() % 3;
  s.config.max_len = 6 + rng() % 6;
  s.model.vocab = token_vocabulary(words);
  // Larger than the default init so the nonlinearities are exercised.
  s.model.encoder = EncoderParams::initialize(s.config, rng());
  std::normal_distribution<double> gauss(0.0, 0.3);
  for (auto* t : s.model.encoder.tensors()) {
    for (Eigen::Index i = 0; i < t->size(); ++i) t->data()[i] += gauss(rng);
  }
  s.model.classifier = ClassifierParams::initialize(s.config.dim, rng());
  for (auto* t : s.model.classifier.tensors()) {
    for (Eigen::Index i = 0; i < t->size(); ++i) t->data()[i] += gauss(rng);
  }
  s.user = random_user(rng, "g", words, 3, 3, 4);
  s.perturbed = perturb_user(s.user, ViewStrategy{ViewKind::WordMask, 0.3, 5}, {}, rng()).passages;
  s.label = risk_level_at(rng() % 4);
  return s;
}

inline std::vector<Matrix*> all_tensors(Model& m) {
  auto out = m.encoder.tensors();
  for (auto* t : m.classifier.tensors()) out.push_back(t);
  return out;
}

inline std::vector<std::string> all_names(const Model& m) {
  auto out = m.encoder.tensor_names();
  for (const auto& n : m.classifier.tensor_names()) out.push_back(n);
  return out;
}

struct LossChecks {
  oracle::GradCheck clf;
  oracle::GradCheck clf_kl;
  oracle::GradCheck mlm;
};

inline LossChecks check_losses(std::uint64_t seed) {
  auto s = tiny_setup(seed);
  LossChecks out;
  const auto params = all_tensors(s.model);
  const auto names = all_names(s.model);

  auto analytic = [&](const std::vector<Passage>* perturbed, EncoderParams& eg, ClassifierParams& cg) {
    eg = EncoderParams::zeros(s.config);
    cg = ClassifierParams::zeros(s.config.dim);
    instance_loss_and_grads(s.model, s.user, s.label, perturbed, 1.0, &eg, &cg);
    auto g = std::as_const(eg).tensors();
    for (const auto* t : std::as_const(cg).tensors()) g.push_back(t);
    return g;
  };

  {
    EncoderParams eg;
    ClassifierParams cg;
    const auto grads = analytic(nullptr, eg, cg);
    out.clf = oracle::finite_difference_check(params, grads, names, [&] {
      return instance_loss_and_grads(s.model, s.user, s.label, nullptr, 1.0, nullptr, nullptr).total;
    }, seed ^ 0x1);
  }
  {
    EncoderParams eg;
    ClassifierParams cg;
    const auto grads = analytic(&s.perturbed, eg, cg);
    // The complete-view distribution is a fixed target.
    const auto target = forward_user(s.model.encoder, s.model.classifier, s.user.passages, s.model.vocab).logits;
    out.clf_kl = oracle::finite_difference_check(params, grads, names, [&] {
      const auto complete = forward_user(s.model.encoder, s.model.classifier, s.user.passages, s.model.vocab);
      const auto view = forward_user(s.model.encoder, s.model.classifier, s.perturbed, s.model.vocab);
      return clf_loss(complete.logits, s.label) + kl_consistency_loss(target, view.logits);
    }, seed ^ 0x2);
  }
  {
    std::mt19937_64 rng(seed ^ 0x3);
    const std::size_t n = 1 + rng() % s.config.max_len;
    std::vector<TokenId> ids(n);
    for (auto& id : ids) id = static_cast<TokenId>(rng() % s.config.vocab_size);
    const auto masked = mask_for_mlm(ids, 0.3, s.config.vocab_size, rng());
    const auto result = mlm_forward(s.model.encoder, masked.inputs, masked.positions, masked.targets, true);
    const auto grads = std::as_const(result.grads).tensors();
    std::vector<Matrix*> enc_params = s.model.encoder.tensors();
    out.mlm = oracle::finite_difference_check(enc_params, grads, s.model.encoder.tensor_names(), [&] {
      return mlm_forward(s.model.encoder, masked.inputs, masked.positions, masked.targets, false).loss;
    }, seed ^ 0x4);
  }
  return out;
}

}  // namespace riskcls::testkit
