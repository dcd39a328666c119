#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "sehsn/model/config.hpp"
#include "sehsn/model/network.hpp"
#include "sehsn/nn/conv.hpp"
#include "sehsn/nn/gemm.hpp"
#include "sehsn/nn/loss.hpp"
#include "sehsn/random.hpp"

using namespace sehsn;

namespace {

template <typename T>
void fill(nn::Tensor<T>& t, std::uint64_t seed) {
  Pcg32 rng(seed);
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(-1, 1));
}

template <typename T>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<T> a(n * n, T(0.5)), b(n * n, T(0.25)), c(n * n);
  for (auto _ : state) {
    nn::gemm(n, n, n, a.data(), b.data(), c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * n * n * n));
}
BENCHMARK(BM_Gemm<float>)->Arg(64)->Arg(256);
BENCHMARK(BM_Gemm<double>)->Arg(64)->Arg(256);

// First 3D layer of the default network on a batch of patches.
void BM_Conv3dForward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  nn::Conv3d<float> l(1, 8, {7, 3, 3});
  fill(l.weight, 1);
  nn::Tensor<float> x({batch, 1, 30, 19, 19});
  fill(x, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv3d_forward(x, l));
}
BENCHMARK(BM_Conv3dForward)->Arg(1)->Arg(16);

void BM_Conv3dBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  nn::Conv3d<float> l(1, 8, {7, 3, 3});
  fill(l.weight, 1);
  nn::Tensor<float> x({batch, 1, 30, 19, 19});
  fill(x, 2);
  nn::Tensor<float> g = nn::conv3d_forward(x, l);
  fill(g, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv3d_backward(x, l, g));
}
BENCHMARK(BM_Conv3dBackward)->Arg(1)->Arg(16);

template <typename T>
void BM_TrainStep(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  model::Network<T> net(model::se_hybridsn_config(19, 30, 16));
  nn::Tensor<T> x(model::input_shape<T>(net.config(), batch));
  fill(x, 4);
  std::vector<std::size_t> targets(batch);
  for (std::size_t i = 0; i < batch; ++i) targets[i] = i % 16;
  for (auto _ : state) {
    const auto r = nn::softmax_cross_entropy(net.forward(x, true), targets);
    net.backward(r.grad_logits);
    benchmark::DoNotOptimize(r.loss);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_TrainStep<float>)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainStep<double>)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Inference(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const model::Network<float> net(model::se_hybridsn_config(19, 30, 16));
  nn::Tensor<float> x(model::input_shape<float>(net.config(), batch));
  fill(x, 5);
  for (auto _ : state) benchmark::DoNotOptimize(net.predict_logits(x));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_Inference)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
