#include "riskcls/encoder.hpp"

#include <cmath>
#include <random>

#include "riskcls/errors.hpp"
#include "riskcls/rng.hpp"

namespace riskcls {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) { return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x); }

Matrix add_bias(Matrix m, const Matrix& bias) {
  m.rowwise() += bias.row(0);
  return m;
}

void softmax_rows(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

// Gradient through row-wise normalization given d(xhat).
Matrix layer_norm_backward(const Matrix& d_xhat, const Matrix& xhat, const Vector& inv_std) {
  Matrix dx(d_xhat.rows(), d_xhat.cols());
  const double n = static_cast<double>(d_xhat.cols());
  for (Eigen::Index r = 0; r < d_xhat.rows(); ++r) {
    const double mean_d = d_xhat.row(r).sum() / n;
    const double mean_dx = d_xhat.row(r).dot(xhat.row(r)) / n;
    dx.row(r) = inv_std(r) * (d_xhat.row(r).array() - mean_d - xhat.row(r).array() * mean_dx).matrix();
  }
  return dx;
}

Matrix scale_columns(const Matrix& m, const Matrix& gain) {
  return (m.array().rowwise() * gain.row(0).array()).matrix();
}

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace

void layer_norm_rows(const Matrix& x, Matrix& xhat, Vector& inv_std) {
  xhat.resize(x.rows(), x.cols());
  inv_std.resize(x.rows());
  const double n = static_cast<double>(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).sum() / n;
    auto centered = (x.row(r).array() - mean).matrix();
    const double var = centered.squaredNorm() / n;
    inv_std(r) = 1.0 / std::sqrt(var + kLayerNormEps);
    xhat.row(r) = centered * inv_std(r);
  }
}

// ---------------------------------------------------------------------------
// Parameters

EncoderParams EncoderParams::zeros(const EncoderConfig& c) {
  const auto v = static_cast<Eigen::Index>(c.vocab_size);
  const auto d = static_cast<Eigen::Index>(c.dim);
  const auto h = 4 * d;
  EncoderParams p;
  p.config = c;
  p.token_embedding = Matrix::Zero(v, d);
  p.position_embedding = Matrix::Zero(static_cast<Eigen::Index>(c.max_len), d);
  p.layers.resize(c.layers);
  for (auto& l : p.layers) {
    for (Matrix* m : {&l.wq, &l.wk, &l.wv, &l.wo}) *m = Matrix::Zero(d, d);
    for (Matrix* m : {&l.bq, &l.bk, &l.bv, &l.bo, &l.ln1_gain, &l.ln1_bias, &l.ff2_bias, &l.ln2_gain, &l.ln2_bias}) {
      *m = Matrix::Zero(1, d);
    }
    l.ff1 = Matrix::Zero(d, h);
    l.ff1_bias = Matrix::Zero(1, h);
    l.ff2 = Matrix::Zero(h, d);
  }
  p.mlm_weight = Matrix::Zero(d, v);
  p.mlm_bias = Matrix::Zero(1, v);
  return p;
}

EncoderParams EncoderParams::initialize(const EncoderConfig& c, std::uint64_t seed) {
  if (c.vocab_size < Vocabulary::kNumReserved || c.dim == 0 || c.max_len == 0) {
    throw ValidationError("invalid encoder configuration");
  }
  EncoderParams p = zeros(c);
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(c.dim);
  p.token_embedding = uniform_matrix(p.token_embedding.rows(), d, 0.05, rng);
  p.position_embedding = uniform_matrix(p.position_embedding.rows(), d, 0.05, rng);
  for (auto& l : p.layers) {
    for (Matrix* m : {&l.wq, &l.wk, &l.wv, &l.wo, &l.ff1, &l.ff2}) *m = normal_matrix(m->rows(), m->cols(), 0.02, rng);
    l.ln1_gain.setOnes();
    l.ln2_gain.setOnes();
  }
  p.mlm_weight = normal_matrix(d, p.mlm_weight.cols(), 0.02, rng);
  return p;
}

std::vector<Matrix*> EncoderParams::tensors() {
  std::vector<Matrix*> out{&token_embedding, &position_embedding};
  for (auto& l : layers) {
    out.insert(out.end(), {&l.wq, &l.bq, &l.wk, &l.bk, &l.wv, &l.bv, &l.wo, &l.bo, &l.ln1_gain, &l.ln1_bias, &l.ff1,
                           &l.ff1_bias, &l.ff2, &l.ff2_bias, &l.ln2_gain, &l.ln2_bias});
  }
  out.push_back(&mlm_weight);
  out.push_back(&mlm_bias);
  return out;
}

std::vector<const Matrix*> EncoderParams::tensors() const {
  auto mut = const_cast<EncoderParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> EncoderParams::tensor_names() const {
  std::vector<std::string> names{"token_embedding", "position_embedding"};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    for (const char* n : {"wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo", "ln1_gain", "ln1_bias", "ff1", "ff1_bias",
                          "ff2", "ff2_bias", "ln2_gain", "ln2_bias"}) {
      names.push_back(p + n);
    }
  }
  names.emplace_back("mlm_weight");
  names.emplace_back("mlm_bias");
  return names;
}

void EncoderParams::set_zero() {
  for (auto* t : tensors()) t->setZero();
}

void require_encoder_shape(const EncoderParams& params, const EncoderConfig& expected, const std::string& role) {
  const auto& got = params.config;
  if (got == expected) return;
  auto describe = [](const EncoderConfig& c) {
    return "vocab " + std::to_string(c.vocab_size) + ", dim " + std::to_string(c.dim) + ", layers " +
           std::to_string(c.layers) + ", max_len " + std::to_string(c.max_len);
  };
  throw ValidationError(role + " has " + describe(got) + " but the configuration expects " + describe(expected));
}

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* t : tensors()) n += static_cast<std::size_t>(t->size());
  return n;
}

bool EncoderParams::all_finite() const {
  for (const auto* t : tensors()) {
    if (!t->allFinite()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Forward / backward

EncoderTrace encoder_forward(const EncoderParams& params, std::span<const TokenId> ids) {
  const auto& c = params.config;
  if (ids.empty()) throw ValidationError("cannot encode an empty passage");
  if (ids.size() > c.max_len) throw ValidationError("passage longer than the position table");
  const auto n = static_cast<Eigen::Index>(ids.size());
  const auto d = static_cast<Eigen::Index>(c.dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(c.dim));

  EncoderTrace tr;
  tr.ids.assign(ids.begin(), ids.end());
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto id = ids[static_cast<std::size_t>(i)];
    if (id < 0 || static_cast<std::size_t>(id) >= c.vocab_size) throw ValidationError("token id out of range");
    x.row(i) = params.token_embedding.row(id) + params.position_embedding.row(i);
  }

  tr.layers.resize(params.layers.size());
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const auto& l = params.layers[li];
    auto& t = tr.layers[li];
    t.input = x;
    t.q = add_bias(x * l.wq, l.bq);
    t.k = add_bias(x * l.wk, l.bk);
    t.v = add_bias(x * l.wv, l.bv);
    t.attn = (t.q * t.k.transpose()) * scale;
    softmax_rows(t.attn);
    t.context = t.attn * t.v;
    Matrix r1 = x + add_bias(t.context * l.wo, l.bo);
    layer_norm_rows(r1, t.ln1_xhat, t.ln1_inv_std);
    t.h1 = add_bias(scale_columns(t.ln1_xhat, l.ln1_gain), l.ln1_bias);
    t.ff_pre = add_bias(t.h1 * l.ff1, l.ff1_bias);
    t.ff_act = t.ff_pre.unaryExpr(&gelu);
    Matrix r2 = t.h1 + add_bias(t.ff_act * l.ff2, l.ff2_bias);
    layer_norm_rows(r2, t.ln2_xhat, t.ln2_inv_std);
    x = add_bias(scale_columns(t.ln2_xhat, l.ln2_gain), l.ln2_bias);
  }
  tr.hidden = std::move(x);
  return tr;
}

void encoder_backward(const EncoderParams& params, const EncoderTrace& tr, const Matrix& d_hidden,
                      EncoderParams& grads) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.config.dim));
  Matrix dy = d_hidden;
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& l = params.layers[li];
    auto& g = grads.layers[li];
    const auto& t = tr.layers[li];

    g.ln2_gain += dy.cwiseProduct(t.ln2_xhat).colwise().sum();
    g.ln2_bias += dy.colwise().sum();
    Matrix d_r2 = layer_norm_backward(scale_columns(dy, l.ln2_gain), t.ln2_xhat, t.ln2_inv_std);

    Matrix d_h1 = d_r2;
    g.ff2 += t.ff_act.transpose() * d_r2;
    g.ff2_bias += d_r2.colwise().sum();
    Matrix d_pre = (d_r2 * l.ff2.transpose()).cwiseProduct(t.ff_pre.unaryExpr(&gelu_grad));
    g.ff1 += t.h1.transpose() * d_pre;
    g.ff1_bias += d_pre.colwise().sum();
    d_h1 += d_pre * l.ff1.transpose();

    g.ln1_gain += d_h1.cwiseProduct(t.ln1_xhat).colwise().sum();
    g.ln1_bias += d_h1.colwise().sum();
    Matrix d_r1 = layer_norm_backward(scale_columns(d_h1, l.ln1_gain), t.ln1_xhat, t.ln1_inv_std);

    g.wo += t.context.transpose() * d_r1;
    g.bo += d_r1.colwise().sum();
    Matrix d_context = d_r1 * l.wo.transpose();
    Matrix d_attn = d_context * t.v.transpose();
    Matrix d_v = t.attn.transpose() * d_context;
    Matrix d_scores = t.attn.cwiseProduct(d_attn);
    Vector row_dot = d_scores.rowwise().sum();
    d_scores -= (t.attn.array().colwise() * row_dot.array()).matrix();
    Matrix d_q = (d_scores * t.k) * scale;
    Matrix d_k = (d_scores.transpose() * t.q) * scale;

    g.wq += t.input.transpose() * d_q;
    g.bq += d_q.colwise().sum();
    g.wk += t.input.transpose() * d_k;
    g.bk += d_k.colwise().sum();
    g.wv += t.input.transpose() * d_v;
    g.bv += d_v.colwise().sum();

    dy = d_r1 + d_q * l.wq.transpose() + d_k * l.wk.transpose() + d_v * l.wv.transpose();
  }
  for (std::size_t i = 0; i < tr.ids.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    grads.token_embedding.row(tr.ids[i]) += dy.row(r);
    grads.position_embedding.row(r) += dy.row(r);
  }
}

Matrix pooled_gradient(const EncoderTrace& trace, const Embedding& d_pooled) {
  const auto n = trace.hidden.rows();
  Matrix d(n, trace.hidden.cols());
  d.rowwise() = d_pooled.transpose() / static_cast<double>(n);
  return d;
}

Embedding encode_passage(const EncoderParams& params, const Passage& passage, const Vocabulary& vocab) {
  auto ids = vocab.encode(passage, params.config.max_len);
  return encoder_forward(params, ids).pooled();
}

Embedding user_embedding(std::span<const Embedding> vectors) {
  if (vectors.empty()) throw ValidationError("user_embedding needs at least one passage vector");
  Embedding sum = Embedding::Zero(vectors[0].size());
  for (const auto& v : vectors) {
    if (v.size() != sum.size()) throw ValidationError("user_embedding: dimension mismatch");
    sum += v;
  }
  return sum / static_cast<double>(vectors.size());
}

MlmResult mlm_forward(const EncoderParams& params, std::span<const TokenId> ids,
                      std::span<const std::size_t> mask_positions, std::span<const TokenId> targets,
                      bool compute_grads) {
  if (mask_positions.empty()) throw ValidationError("mlm_forward needs at least one masked position");
  if (mask_positions.size() != targets.size()) throw ValidationError("mlm_forward: positions/targets mismatch");
  auto tr = encoder_forward(params, ids);
  const double inv_m = 1.0 / static_cast<double>(mask_positions.size());

  MlmResult result;
  Matrix d_hidden;
  if (compute_grads) {
    result.grads = EncoderParams::zeros(params.config);
    d_hidden = Matrix::Zero(tr.hidden.rows(), tr.hidden.cols());
  }
  for (std::size_t j = 0; j < mask_positions.size(); ++j) {
    const auto pos = static_cast<Eigen::Index>(mask_positions[j]);
    if (pos < 0 || pos >= tr.hidden.rows()) throw ValidationError("mlm_forward: mask position out of range");
    const auto target = targets[j];
    if (target < 0 || static_cast<std::size_t>(target) >= params.config.vocab_size) {
      throw ValidationError("mlm_forward: target id out of range");
    }
    Eigen::RowVectorXd logits = tr.hidden.row(pos) * params.mlm_weight + params.mlm_bias.row(0);
    const double mx = logits.maxCoeff();
    Eigen::RowVectorXd probs = (logits.array() - mx).exp().matrix();
    const double z = probs.sum();
    const double lse = mx + std::log(z);
    result.loss += (lse - logits(target)) * inv_m;
    if (compute_grads) {
      probs /= z;
      probs(target) -= 1.0;
      probs *= inv_m;
      result.grads.mlm_weight += tr.hidden.row(pos).transpose() * probs;
      result.grads.mlm_bias += probs;
      d_hidden.row(pos) += probs * params.mlm_weight.transpose();
    }
  }
  if (compute_grads) encoder_backward(params, tr, d_hidden, result.grads);
  return result;
}

MlmResult mlm_forward(const EncoderParams& params, const Passage& passage, std::span<const std::size_t> mask_positions,
                      std::span<const TokenId> targets, const Vocabulary& vocab, bool compute_grads) {
  auto ids = vocab.encode(passage, params.config.max_len);
  return mlm_forward(params, ids, mask_positions, targets, compute_grads);
}

}  // namespace riskcls
