#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riskcls/classifier.hpp"
#include "riskcls/metrics.hpp"
#include "riskcls/preprocess.hpp"
#include "riskcls/views.hpp"

namespace riskcls {

enum class OptimizerKind : std::uint8_t { Adam, SGD };

std::string_view optimizer_name(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer(std::string_view text);

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::size_t patience = 5;
  std::optional<ViewStrategy> view;
  double kl_weight = 1.0;
  std::uint64_t seed = 0;

  std::size_t tap_epochs = 3;
  std::size_t tap_patience = 1;
  double tap_learning_rate = 1e-3;
  double tap_mask_rate = 0.15;
  double tap_heldout_fraction = 0.1;

  // Encoder shape for a fresh model; vocab_size is filled from the vocabulary.
  EncoderConfig encoder;

  // Worker threads for per-instance passes. Results do not depend on it.
  std::size_t threads = 1;

  // Throws ConfigError on non-positive counts, rates or a negative kl_weight.
  void validate() const;
};

// Adam (0.9, 0.999, 1e-8) or plain SGD over a fixed list of tensors.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, std::span<const Matrix* const> shapes);

  void step(std::span<Matrix* const> params, std::span<const Matrix* const> grads);
  std::size_t steps() const noexcept { return steps_; }

 private:
  OptimizerKind kind_;
  double lr_;
  std::size_t steps_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

struct LabeledUser {
  const ProcessedUser* user = nullptr;
  RiskLevel label = RiskLevel::A_NoRisk;
};

// Labeled entries as training instances. Throws ValidationError on a
// missing label.
std::vector<LabeledUser> labeled_users(std::span<const ProcessedEntry> entries);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double clf_loss = 0.0;
  double kl_loss = 0.0;
  MacroMetrics valid;
};

struct TrainState {
  Model current;
  Model best;
  std::size_t epoch = 0;
  std::size_t best_epoch = 0;
  double best_macro_f1 = -1.0;
  std::size_t optimizer_steps = 0;
  std::vector<EpochRecord> history;
  std::string stop_reason;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch training of encoder and head. With a view configured each
// instance also contributes kl_weight * KL(complete || perturbed) on a view
// regenerated every epoch. Returns after config.epochs epochs or `patience`
// epochs without a validation macro-F1 improvement; `best` holds the
// weights of the best epoch.
TrainState train(std::span<const LabeledUser> train_set, std::span<const LabeledUser> valid_set,
                 const TrainConfig& config, const Vocabulary& vocab,
                 const std::optional<EncoderParams>& initial = std::nullopt, const EpochCallback& on_epoch = {});

// Per-instance loss terms and gradients for one user. Exposed for gradient
// checks; `perturbed` may be null.
struct InstanceLoss {
  double clf = 0.0;
  double kl = 0.0;
  double total = 0.0;
};
InstanceLoss instance_loss_and_grads(const Model& model, const ProcessedUser& user, RiskLevel label,
                                     const std::vector<Passage>* perturbed, double kl_weight,
                                     EncoderParams* encoder_grads, ClassifierParams* clf_grads);

std::vector<RiskLevel> predict_all(const Model& model, std::span<const LabeledUser> users);
MacroMetrics evaluate_macro(const Model& model, std::span<const LabeledUser> users);

RiskLevel predict(const Model& model, const ProcessedUser& user);
inline RiskLevel predict(const TrainState& state, const ProcessedUser& user) { return predict(state.best, user); }

// ---------------------------------------------------------------------------
// Task-adaptive pre-training

struct MaskedPassage {
  std::vector<TokenId> inputs;
  std::vector<std::size_t> positions;
  std::vector<TokenId> targets;
};

// max(1, floor(rate * n)) positions; each becomes _MASK_ with probability
// 0.8, a random non-reserved token with 0.1, and stays unchanged otherwise.
MaskedPassage mask_for_mlm(std::span<const TokenId> ids, double rate, std::size_t vocab_size, std::uint64_t seed);
std::size_t mlm_mask_count(double rate, std::size_t n);

struct TapEpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double heldout_loss = 0.0;
};

struct TapResult {
  EncoderParams encoder;  // best held-out epoch
  std::vector<TapEpochRecord> curve;
  double uniform_loss = 0.0;         // ln V
  double initial_heldout_loss = 0.0;  // before the first update
  std::size_t best_epoch = 0;
  std::string stop_reason;
};

using TapCallback = std::function<void(const TapEpochRecord&)>;

// MLM on every passage of every user. A seeded fraction of passages is
// held out for early stopping. Throws ValidationError on an empty corpus.
TapResult tap_pretrain(std::span<const ProcessedUser> unlabeled, const TrainConfig& config, const Vocabulary& vocab,
                       const std::optional<EncoderParams>& initial = std::nullopt, const TapCallback& on_epoch = {});

}  // namespace riskcls
