#include "riskcls/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "riskcls/errors.hpp"
#include "riskcls/rng.hpp"

namespace riskcls {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Seed streams carved out of TrainConfig::seed.
constexpr std::uint64_t kStreamEncoderInit = 1;
constexpr std::uint64_t kStreamClassifierInit = 2;
constexpr std::uint64_t kStreamBatchOrder = 3;

struct GradBuffer {
  EncoderParams encoder;
  ClassifierParams classifier;

  void zero() {
    encoder.set_zero();
    classifier.set_zero();
  }
  void add_to(GradBuffer& total) const {
    auto src = encoder.tensors();
    auto dst = total.encoder.tensors();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i] += *src[i];
    total.classifier.weight += classifier.weight;
    total.classifier.bias += classifier.bias;
  }
  void scale(double s) {
    for (auto* t : encoder.tensors()) *t *= s;
    classifier.weight *= s;
    classifier.bias *= s;
  }
};

GradBuffer make_buffer(const EncoderConfig& config) {
  return {EncoderParams::zeros(config), ClassifierParams::zeros(config.dim)};
}

std::vector<Matrix*> model_tensors(Model& m) {
  auto t = m.encoder.tensors();
  t.push_back(&m.classifier.weight);
  t.push_back(&m.classifier.bias);
  return t;
}

std::vector<const Matrix*> buffer_tensors(const GradBuffer& g) {
  auto t = g.encoder.tensors();
  t.push_back(&g.classifier.weight);
  t.push_back(&g.classifier.bias);
  return t;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += threads) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SentenceEncoder sentence_encoder(const Model& model) {
  return [&model](const Sentence& s) -> Eigen::VectorXd {
    auto ids = model.vocab.encode(s, model.encoder.config.max_len);
    if (ids.empty()) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.encoder.config.dim));
    return encoder_forward(model.encoder, ids).pooled();
  };
}

}  // namespace

std::string_view optimizer_name(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "adam") return OptimizerKind::Adam;
  if (text == "sgd") return OptimizerKind::SGD;
  throw ConfigError("unknown optimizer '" + std::string(text) + "' (expected adam or sgd)");
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (patience == 0) throw ConfigError("patience must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
  if (!(kl_weight >= 0.0) || !std::isfinite(kl_weight)) throw ConfigError("kl_weight must be >= 0");
  if (tap_epochs == 0) throw ConfigError("tap_epochs must be positive");
  if (tap_patience == 0) throw ConfigError("tap_patience must be positive");
  if (!(tap_learning_rate > 0.0)) throw ConfigError("tap_learning_rate must be positive");
  if (!(tap_mask_rate > 0.0 && tap_mask_rate < 1.0)) throw ConfigError("tap_mask_rate must lie in (0, 1)");
  if (!(tap_heldout_fraction > 0.0 && tap_heldout_fraction < 1.0)) {
    throw ConfigError("tap_heldout_fraction must lie in (0, 1)");
  }
  if (encoder.dim == 0 || encoder.layers == 0 || encoder.max_len == 0) {
    throw ConfigError("encoder dim, layers and max_len must be positive");
  }
  if (threads == 0) throw ConfigError("threads must be positive");
  if (view) {
    try {
      view->validate();
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
  }
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, std::span<const Matrix* const> shapes)
    : kind_(kind), lr_(learning_rate) {
  if (kind_ == OptimizerKind::Adam) {
    m_.reserve(shapes.size());
    v_.reserve(shapes.size());
    for (const auto* s : shapes) {
      m_.push_back(Matrix::Zero(s->rows(), s->cols()));
      v_.push_back(Matrix::Zero(s->rows(), s->cols()));
    }
  }
}

void Optimizer::step(std::span<Matrix* const> params, std::span<const Matrix* const> grads) {
  if (params.size() != grads.size()) throw ValidationError("optimizer: params/grads count mismatch");
  ++steps_;
  if (kind_ == OptimizerKind::SGD) {
    for (std::size_t i = 0; i < params.size(); ++i) *params[i] -= lr_ * *grads[i];
    return;
  }
  if (params.size() != m_.size()) throw ValidationError("optimizer: tensor count changed");
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(kAdamBeta1, t);
  const double c2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = grads[i]->array();
    auto m = m_[i].array();
    auto v = v_[i].array();
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.square();
    params[i]->array() -= lr_ * (m / c1) / ((v / c2).sqrt() + kAdamEps);
  }
}

std::vector<LabeledUser> labeled_users(std::span<const ProcessedEntry> entries) {
  std::vector<LabeledUser> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    if (!e.label) throw ValidationError("user '" + e.user.user_id + "' has no label");
    out.push_back({&e.user, *e.label});
  }
  return out;
}

InstanceLoss instance_loss_and_grads(const Model& model, const ProcessedUser& user, RiskLevel label,
                                     const std::vector<Passage>* perturbed, double kl_weight,
                                     EncoderParams* encoder_grads, ClassifierParams* clf_grads) {
  const bool grads = encoder_grads && clf_grads;
  InstanceLoss loss;
  const auto complete = forward_user(model.encoder, model.classifier, user.passages, model.vocab);
  loss.clf = clf_loss(complete.logits, label);
  if (grads) {
    backward_user(model.encoder, model.classifier, complete, clf_loss_grad(complete.logits, label), *encoder_grads,
                  *clf_grads);
  }
  if (perturbed) {
    const auto view = forward_user(model.encoder, model.classifier, *perturbed, model.vocab);
    loss.kl = kl_consistency_loss(complete.logits, view.logits);
    if (grads) {
      auto d = kl_consistency_grad(complete.logits, view.logits);
      for (auto& x : d) x *= kl_weight;
      backward_user(model.encoder, model.classifier, view, d, *encoder_grads, *clf_grads);
    }
  }
  loss.total = loss.clf + kl_weight * loss.kl;
  return loss;
}

RiskLevel predict(const Model& model, const ProcessedUser& user) {
  return argmax_risk(forward_user(model.encoder, model.classifier, user.passages, model.vocab).logits);
}

std::vector<RiskLevel> predict_all(const Model& model, std::span<const LabeledUser> users) {
  std::vector<RiskLevel> out;
  out.reserve(users.size());
  for (const auto& u : users) out.push_back(predict(model, *u.user));
  return out;
}

MacroMetrics evaluate_macro(const Model& model, std::span<const LabeledUser> users) {
  std::vector<RiskLevel> golds;
  golds.reserve(users.size());
  for (const auto& u : users) golds.push_back(u.label);
  const auto preds = predict_all(model, users);
  return macro_prf(confusion_matrix(preds, golds));
}

TrainState train(std::span<const LabeledUser> train_set, std::span<const LabeledUser> valid_set,
                 const TrainConfig& config, const Vocabulary& vocab, const std::optional<EncoderParams>& initial,
                 const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");
  if (valid_set.empty()) throw ValidationError("validation set is empty");

  TrainState state;
  state.current.vocab = vocab;
  auto enc = config.encoder;
  enc.vocab_size = vocab.size();
  if (initial) {
    require_encoder_shape(*initial, enc, "initial encoder");
    state.current.encoder = *initial;
  } else {
    state.current.encoder = EncoderParams::initialize(enc, derive_seed(config.seed, kStreamEncoderInit));
  }
  const auto& enc_config = state.current.encoder.config;
  state.current.classifier =
      ClassifierParams::initialize(enc_config.dim, derive_seed(config.seed, kStreamClassifierInit));
  state.best = state.current;

  auto params = model_tensors(state.current);
  std::vector<const Matrix*> shapes(params.begin(), params.end());
  Optimizer optimizer(config.optimizer, config.learning_rate, shapes);

  // Per-instance gradients are always summed into `total` in instance order,
  // so the result does not depend on the thread count.
  const std::size_t workers = std::min(config.threads, config.batch_size);
  std::vector<GradBuffer> buffers;
  buffers.reserve(workers > 1 ? config.batch_size : 1);
  for (std::size_t i = 0; i < (workers > 1 ? config.batch_size : 1); ++i) buffers.push_back(make_buffer(enc_config));
  GradBuffer total = make_buffer(enc_config);
  const auto total_tensors = buffer_tensors(total);

  std::vector<std::size_t> order(train_set.size());
  std::size_t stale_epochs = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::vector<Passage>> views;
    if (config.view) {
      const std::uint64_t epoch_seed = config.seed ^ static_cast<std::uint64_t>(epoch);
      const auto encode = sentence_encoder(state.current);
      views.resize(train_set.size());
      parallel_for(train_set.size(), config.threads, [&](std::size_t i) {
        const auto& user = *train_set[i].user;
        views[i] = perturb_user(user, *config.view, encode, derive_seed(epoch_seed, stable_hash(user.user_id))).passages;
      });
    }

    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng order_rng(derive_seed(derive_seed(config.seed, kStreamBatchOrder), epoch));
    std::shuffle(order.begin(), order.end(), order_rng);

    EpochRecord record;
    record.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      std::vector<InstanceLoss> losses(count);
      total.zero();
      const auto run = [&](std::size_t j, GradBuffer& buf) {
        buf.zero();
        const auto idx = order[start + j];
        const auto& item = train_set[idx];
        losses[j] = instance_loss_and_grads(state.current, *item.user, item.label,
                                            config.view ? &views[idx] : nullptr, config.kl_weight, &buf.encoder,
                                            &buf.classifier);
      };
      if (workers > 1) {
        parallel_for(count, workers, [&](std::size_t j) { run(j, buffers[j]); });
        for (std::size_t j = 0; j < count; ++j) buffers[j].add_to(total);
      } else {
        for (std::size_t j = 0; j < count; ++j) {
          run(j, buffers[0]);
          buffers[0].add_to(total);
        }
      }
      for (const auto& l : losses) {
        if (!std::isfinite(l.total)) throw ValidationError("non-finite training loss at epoch " + std::to_string(epoch));
        record.train_loss += l.total;
        record.clf_loss += l.clf;
        record.kl_loss += l.kl;
      }
      total.scale(1.0 / static_cast<double>(count));
      optimizer.step(params, total_tensors);
    }
    const double n = static_cast<double>(train_set.size());
    record.train_loss /= n;
    record.clf_loss /= n;
    record.kl_loss /= n;
    record.valid = evaluate_macro(state.current, valid_set);

    state.epoch = epoch;
    state.optimizer_steps = optimizer.steps();
    state.history.push_back(record);
    if (on_epoch) on_epoch(record);

    if (record.valid.macro_f1 > state.best_macro_f1) {
      state.best_macro_f1 = record.valid.macro_f1;
      state.best_epoch = epoch;
      state.best = state.current;
      stale_epochs = 0;
    } else if (++stale_epochs >= config.patience) {
      state.stop_reason = "early_stop: no validation macro-F1 improvement for " + std::to_string(stale_epochs) +
                          " epochs (best epoch " + std::to_string(state.best_epoch) + ")";
      return state;
    }
  }
  state.stop_reason = "max_epochs: completed " + std::to_string(config.epochs) + " epochs";
  return state;
}

}  // namespace riskcls
