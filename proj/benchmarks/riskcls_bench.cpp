#include <benchmark/benchmark.h>

#include <random>

#include "riskcls/classifier.hpp"
#include "riskcls/corpus.hpp"
#include "riskcls/metrics.hpp"
#include "riskcls/preprocess.hpp"
#include "riskcls/views.hpp"

using namespace riskcls;

namespace {

EncoderParams bench_encoder(std::size_t dim, std::size_t layers) {
  return EncoderParams::initialize({1000, dim, layers, 128}, 1);
}

std::vector<TokenId> bench_ids(std::size_t n) {
  std::mt19937_64 rng(2);
  std::vector<TokenId> ids(n);
  for (auto& id : ids) id = static_cast<TokenId>(5 + rng() % 995);
  return ids;
}

// Arguments: sequence length, model width.
void BM_EncoderForward(benchmark::State& state) {
  const auto params = bench_encoder(static_cast<std::size_t>(state.range(1)), 2);
  const auto ids = bench_ids(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(encoder_forward(params, ids).hidden.data());
}
BENCHMARK(BM_EncoderForward)->Args({32, 64})->Args({128, 64})->Args({128, 128});

void BM_EncoderForwardBackward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(1));
  const auto params = bench_encoder(dim, 2);
  const auto ids = bench_ids(static_cast<std::size_t>(state.range(0)));
  auto grads = EncoderParams::zeros(params.config);
  const Embedding d_pooled = Embedding::Ones(static_cast<Eigen::Index>(dim));
  for (auto _ : state) {
    const auto trace = encoder_forward(params, ids);
    encoder_backward(params, trace, pooled_gradient(trace, d_pooled), grads);
  }
}
BENCHMARK(BM_EncoderForwardBackward)->Args({32, 64})->Args({128, 64});

void BM_KMeans(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  std::vector<Eigen::VectorXd> points(static_cast<std::size_t>(state.range(0)), Eigen::VectorXd(64));
  for (auto& p : points) {
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = gauss(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(points, 5, kKMeansMaxIters, 4).inertia());
}
BENCHMARK(BM_KMeans)->Arg(20)->Arg(200);

void BM_PreprocessUser(benchmark::State& state) {
  const auto corpus = generate_synthetic_corpus(make_separable_profile(60, 30, 0.5), 1, 5);
  const auto& user = corpus.entries().front().user;
  const PreprocessConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(preprocess_user(user, config).passages.size());
}
BENCHMARK(BM_PreprocessUser);

void BM_MacroF1(benchmark::State& state) {
  std::mt19937_64 rng(6);
  std::vector<RiskLevel> preds(static_cast<std::size_t>(state.range(0))), golds(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    preds[i] = risk_level_at(rng() % 4);
    golds[i] = risk_level_at(rng() % 4);
  }
  for (auto _ : state) benchmark::DoNotOptimize(macro_prf(confusion_matrix(preds, golds)).macro_f1);
}
BENCHMARK(BM_MacroF1)->Arg(125)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
