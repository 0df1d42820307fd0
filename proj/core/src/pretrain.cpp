#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <utility>

#include "riskcls/errors.hpp"
#include "riskcls/rng.hpp"
#include "riskcls/trainer.hpp"

namespace riskcls {

namespace {

constexpr std::uint64_t kStreamTapInit = 11;
constexpr std::uint64_t kStreamHeldout = 12;
constexpr std::uint64_t kStreamHeldoutMasks = 13;
constexpr std::uint64_t kStreamTrainOrder = 14;
constexpr std::uint64_t kStreamTrainMasks = 15;

double heldout_loss(const EncoderParams& encoder, std::span<const MaskedPassage> heldout) {
  double sum = 0.0;
  for (const auto& m : heldout) sum += mlm_forward(encoder, m.inputs, m.positions, m.targets, false).loss;
  return sum / static_cast<double>(heldout.size());
}

}  // namespace

std::size_t mlm_mask_count(double rate, std::size_t n) {
  if (n == 0) return 0;
  return std::max<std::size_t>(1, masked_count(rate, n));
}

MaskedPassage mask_for_mlm(std::span<const TokenId> ids, double rate, std::size_t vocab_size, std::uint64_t seed) {
  if (ids.empty()) throw ValidationError("cannot mask an empty passage");
  MaskedPassage out;
  out.inputs.assign(ids.begin(), ids.end());
  Rng rng(seed);
  out.positions = sample_sorted(rng, ids.size(), mlm_mask_count(rate, ids.size()));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const bool can_substitute = vocab_size > Vocabulary::kNumReserved;
  for (auto pos : out.positions) {
    out.targets.push_back(ids[pos]);
    const double r = coin(rng);
    if (r < 0.8) {
      out.inputs[pos] = Vocabulary::kMask;
    } else if (r < 0.9 && can_substitute) {
      out.inputs[pos] = static_cast<TokenId>(Vocabulary::kNumReserved +
                                             uniform_index(rng, vocab_size - Vocabulary::kNumReserved));
    }
  }
  return out;
}

TapResult tap_pretrain(std::span<const ProcessedUser> unlabeled, const TrainConfig& config, const Vocabulary& vocab,
                       const std::optional<EncoderParams>& initial, const TapCallback& on_epoch) {
  config.validate();
  std::vector<std::vector<TokenId>> passages;
  for (const auto& u : unlabeled) {
    for (const auto& p : u.passages) {
      auto ids = vocab.encode(p, config.encoder.max_len);
      if (!ids.empty()) passages.push_back(std::move(ids));
    }
  }
  if (passages.empty()) throw ValidationError("pre-training corpus has no passages");

  TapResult result;
  auto enc = config.encoder;
  enc.vocab_size = vocab.size();
  if (initial) {
    require_encoder_shape(*initial, enc, "initial encoder");
    result.encoder = *initial;
  } else {
    result.encoder = EncoderParams::initialize(enc, derive_seed(config.seed, kStreamTapInit));
  }
  const std::size_t max_len = result.encoder.config.max_len;
  for (auto& ids : passages) {
    if (ids.size() > max_len) ids.resize(max_len);
  }
  result.uniform_loss = std::log(static_cast<double>(vocab.size()));

  // A single passage serves as both training and held-out data.
  std::vector<std::size_t> heldout_idx;
  std::vector<std::size_t> train_idx;
  if (passages.size() == 1) {
    heldout_idx = train_idx = {0};
  } else {
    const auto n_held = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(config.tap_heldout_fraction * static_cast<double>(passages.size()))), 1,
        passages.size() - 1);
    Rng rng(derive_seed(config.seed, kStreamHeldout));
    heldout_idx = sample_sorted(rng, passages.size(), n_held);
    std::vector<bool> held(passages.size(), false);
    for (auto i : heldout_idx) held[i] = true;
    for (std::size_t i = 0; i < passages.size(); ++i) {
      if (!held[i]) train_idx.push_back(i);
    }
  }

  std::vector<MaskedPassage> heldout;
  const auto heldout_seed = derive_seed(config.seed, kStreamHeldoutMasks);
  for (auto i : heldout_idx) {
    heldout.push_back(mask_for_mlm(passages[i], config.tap_mask_rate, vocab.size(), derive_seed(heldout_seed, i)));
  }

  EncoderParams current = result.encoder;
  auto params = current.tensors();
  std::vector<const Matrix*> shapes(params.begin(), params.end());
  Optimizer optimizer(config.optimizer, config.tap_learning_rate, shapes);
  EncoderParams total = EncoderParams::zeros(current.config);
  const auto total_mut = total.tensors();
  const std::vector<const Matrix*> total_tensors(total_mut.begin(), total_mut.end());

  result.initial_heldout_loss = heldout_loss(current, heldout);
  double best = result.initial_heldout_loss;
  std::size_t stale = 0;
  std::vector<std::size_t> order = train_idx;
  for (std::size_t epoch = 1; epoch <= config.tap_epochs; ++epoch) {
    Rng order_rng(derive_seed(derive_seed(config.seed, kStreamTrainOrder), epoch));
    std::shuffle(order.begin(), order.end(), order_rng);
    const auto mask_seed = derive_seed(derive_seed(config.seed, kStreamTrainMasks), epoch);

    TapEpochRecord record;
    record.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      total.set_zero();
      for (std::size_t j = 0; j < count; ++j) {
        const auto idx = order[start + j];
        const auto masked = mask_for_mlm(passages[idx], config.tap_mask_rate, vocab.size(), derive_seed(mask_seed, idx));
        auto r = mlm_forward(current, masked.inputs, masked.positions, masked.targets, true);
        record.train_loss += r.loss;
        const auto src = std::as_const(r.grads).tensors();
        for (std::size_t t = 0; t < src.size(); ++t) *total_mut[t] += *src[t];
      }
      for (auto* t : total_mut) *t /= static_cast<double>(count);
      optimizer.step(params, total_tensors);
    }
    record.train_loss /= static_cast<double>(order.size());
    record.heldout_loss = heldout_loss(current, heldout);
    result.curve.push_back(record);
    if (on_epoch) on_epoch(record);

    if (record.heldout_loss < best) {
      best = record.heldout_loss;
      result.best_epoch = epoch;
      result.encoder = current;
      stale = 0;
    } else if (++stale >= config.tap_patience) {
      result.stop_reason = "early_stop: held-out MLM loss did not improve at epoch " + std::to_string(epoch) +
                           " (best epoch " + std::to_string(result.best_epoch) + ")";
      return result;
    }
  }
  result.stop_reason = "max_epochs: completed " + std::to_string(config.tap_epochs) + " epochs";
  return result;
}

}  // namespace riskcls
