#include "sehsn/nn/init.hpp"

#include <cmath>

#include "sehsn/random.hpp"

namespace sehsn::nn {

template <typename T>
void he_uniform(Tensor<T>& weight, std::size_t fan_in, std::uint64_t seed) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  Pcg32 rng(mix_seed(seed, shape_size(weight.shape())));
  for (auto& v : weight.values()) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
void init_parameters(Conv3d<T>& layer, std::uint64_t seed) {
  he_uniform(layer.weight, layer.in_channels * layer.kernel.volume(), seed);
  layer.bias.zero();
}

template <typename T>
void init_parameters(Conv2d<T>& layer, std::uint64_t seed) {
  he_uniform(layer.weight, layer.in_channels * layer.kernel_h * layer.kernel_w, seed);
  layer.bias.zero();
}

template <typename T>
void init_parameters(Dense<T>& layer, std::uint64_t seed) {
  he_uniform(layer.weight, layer.in_dim, seed);
  layer.bias.zero();
}

template <typename T>
void init_parameters(DepthwiseSeparableConv2d<T>& layer, std::uint64_t seed) {
  he_uniform(layer.depthwise, layer.kernel * layer.kernel, mix_seed(seed, 1));
  init_parameters(layer.pointwise, mix_seed(seed, 2));
}

template <typename T>
void init_parameters(SeBlock<T>& block, std::uint64_t seed) {
  init_parameters(block.fc1, mix_seed(seed, 1));
  init_parameters(block.fc2, mix_seed(seed, 2));
}

#define SEHSN_INSTANTIATE_INIT(T)                                          \
  template void he_uniform(Tensor<T>&, std::size_t, std::uint64_t);        \
  template void init_parameters(Conv3d<T>&, std::uint64_t);                \
  template void init_parameters(Conv2d<T>&, std::uint64_t);                \
  template void init_parameters(Dense<T>&, std::uint64_t);                 \
  template void init_parameters(DepthwiseSeparableConv2d<T>&, std::uint64_t); \
  template void init_parameters(SeBlock<T>&, std::uint64_t);

SEHSN_INSTANTIATE_INIT(float)
SEHSN_INSTANTIATE_INIT(double)

}  // namespace sehsn::nn
