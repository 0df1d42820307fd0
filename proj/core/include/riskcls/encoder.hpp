#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "riskcls/vocabulary.hpp"

namespace riskcls {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Embedding = Eigen::VectorXd;

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t dim = 64;
  std::size_t layers = 2;
  std::size_t max_len = 128;

  bool operator==(const EncoderConfig&) const = default;
};

// Post-norm transformer block with one attention head:
//   h = LN1(x + Attn(x)),  y = LN2(h + W2 gelu(W1 h + b1) + b2)
struct LayerParams {
  Matrix wq, bq, wk, bk, wv, bv, wo, bo;  // d x d and 1 x d
  Matrix ln1_gain, ln1_bias;              // 1 x d
  Matrix ff1, ff1_bias;                   // d x 4d, 1 x 4d
  Matrix ff2, ff2_bias;                   // 4d x d, 1 x d
  Matrix ln2_gain, ln2_bias;              // 1 x d
};

struct EncoderParams {
  EncoderConfig config;
  Matrix token_embedding;     // V x d
  Matrix position_embedding;  // max_len x d
  std::vector<LayerParams> layers;
  Matrix mlm_weight;  // d x V
  Matrix mlm_bias;    // 1 x V

  // Embeddings ~ U[-0.05, 0.05], weight matrices ~ N(0, 0.02^2), biases 0,
  // layer-norm gains 1.
  static EncoderParams initialize(const EncoderConfig& config, std::uint64_t seed);
  // Same shapes, every entry zero (gradient buffers, optimizer moments).
  static EncoderParams zeros(const EncoderConfig& config);

  // Stable order shared by tensors() and tensor_names().
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::vector<std::string> tensor_names() const;

  void set_zero();
  std::size_t parameter_count() const;
  bool all_finite() const;
};

inline constexpr double kLayerNormEps = 1e-12;

struct LayerTrace {
  Matrix input;
  Matrix q, k, v;
  Matrix attn;     // row-softmax of q k^T / sqrt(d)
  Matrix context;  // attn v
  Matrix ln1_xhat;
  Vector ln1_inv_std;
  Matrix h1;
  Matrix ff_pre;
  Matrix ff_act;
  Matrix ln2_xhat;
  Vector ln2_inv_std;
};

struct EncoderTrace {
  std::vector<TokenId> ids;
  std::vector<LayerTrace> layers;
  Matrix hidden;  // n x d, final block output

  Embedding pooled() const { return hidden.colwise().mean().transpose(); }
};

// ids.size() must be in [1, max_len].
EncoderTrace encoder_forward(const EncoderParams& params, std::span<const TokenId> ids);

// Accumulates (+=) the gradient of a loss with d(loss)/d(hidden) = d_hidden
// into `grads`.
void encoder_backward(const EncoderParams& params, const EncoderTrace& trace, const Matrix& d_hidden,
                      EncoderParams& grads);

// d(loss)/d(hidden) for a loss whose gradient wrt the mean-pooled output is
// d_pooled.
Matrix pooled_gradient(const EncoderTrace& trace, const Embedding& d_pooled);

// Passage embedding: mean over token positions of the final hidden states.
// Tokens beyond max_len are truncated; unknown tokens map to _UNK_.
Embedding encode_passage(const EncoderParams& params, const Passage& passage, const Vocabulary& vocab);

// Mean of the passage embeddings. Throws on an empty list.
Embedding user_embedding(std::span<const Embedding> vectors);

struct MlmResult {
  double loss = 0.0;
  EncoderParams grads;  // empty (default) when gradients were not requested
};

// Mean cross-entropy of the MLM head over the masked positions. `ids` must
// already carry the substituted inputs at those positions.
MlmResult mlm_forward(const EncoderParams& params, std::span<const TokenId> ids,
                      std::span<const std::size_t> mask_positions, std::span<const TokenId> targets,
                      bool compute_grads = true);
MlmResult mlm_forward(const EncoderParams& params, const Passage& passage, std::span<const std::size_t> mask_positions,
                      std::span<const TokenId> targets, const Vocabulary& vocab, bool compute_grads = true);

// Throws ValidationError unless `params` has the architecture of `expected`
// (vocab_size included). `role` names the encoder in the message.
void require_encoder_shape(const EncoderParams& params, const EncoderConfig& expected, const std::string& role);

// Row-wise layer normalization without the affine part.
void layer_norm_rows(const Matrix& x, Matrix& xhat, Vector& inv_std);

}  // namespace riskcls
