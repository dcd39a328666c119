#pragma once

#include <cstdint>

#include "sehsn/nn/conv.hpp"
#include "sehsn/nn/dense.hpp"
#include "sehsn/nn/depthwise.hpp"
#include "sehsn/nn/se_block.hpp"
#include "sehsn/nn/tensor.hpp"

namespace sehsn::nn {

// He-uniform: weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)), biases zero.
// The draw depends only on (shape, seed).
template <typename T>
void he_uniform(Tensor<T>& weight, std::size_t fan_in, std::uint64_t seed);

template <typename T>
void init_parameters(Conv3d<T>& layer, std::uint64_t seed);
template <typename T>
void init_parameters(Conv2d<T>& layer, std::uint64_t seed);
template <typename T>
void init_parameters(Dense<T>& layer, std::uint64_t seed);
template <typename T>
void init_parameters(DepthwiseSeparableConv2d<T>& layer, std::uint64_t seed);
template <typename T>
void init_parameters(SeBlock<T>& block, std::uint64_t seed);

}  // namespace sehsn::nn
