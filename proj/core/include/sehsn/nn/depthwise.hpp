#pragma once

#include <cstddef>

#include "sehsn/nn/conv.hpp"
#include "sehsn/nn/tensor.hpp"

namespace sehsn::nn {

// Per-channel k x k spatial convolution (no bias) followed by a 1x1
// pointwise Conv2d with bias. `padding` zero-pads the input before the
// depthwise stage; padding = k/2 keeps H x W ("same").
template <typename T>
struct DepthwiseSeparableConv2d {
  std::size_t channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t padding = 0;
  Tensor<T> depthwise;  // [channels, k, k]
  Conv2d<T> pointwise;  // channels -> out_channels, 1x1

  DepthwiseSeparableConv2d() = default;
  DepthwiseSeparableConv2d(std::size_t in, std::size_t out, std::size_t k, std::size_t pad);
  static DepthwiseSeparableConv2d same(std::size_t in, std::size_t out, std::size_t k) {
    return DepthwiseSeparableConv2d(in, out, k, k / 2);
  }

  // C*k^2 + C*C' + C'
  std::size_t parameter_count() const { return depthwise.size() + pointwise.parameter_count(); }
};

template <typename T>
struct DepthwiseSeparableCache {
  Tensor<T> padded_input;
  Tensor<T> depthwise_output;
};

template <typename T>
struct DepthwiseSeparableGrads {
  Tensor<T> input;
  Tensor<T> depthwise;
  Tensor<T> pointwise_weight;
  Tensor<T> pointwise_bias;
};

// Single-channel-group convolution: out[b,c] = in[b,c] * kernel[c] (valid).
template <typename T>
Tensor<T> depthwise_conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernels);

template <typename T>
void depthwise_conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& grad_out,
                               Tensor<T>& grad_input, Tensor<T>& grad_kernels);

template <typename T>
Tensor<T> depthwise_separable_forward(const Tensor<T>& input, const DepthwiseSeparableConv2d<T>& layer,
                                      DepthwiseSeparableCache<T>* cache = nullptr);

template <typename T>
DepthwiseSeparableGrads<T> depthwise_separable_backward(const DepthwiseSeparableCache<T>& cache,
                                                        const DepthwiseSeparableConv2d<T>& layer,
                                                        const Tensor<T>& grad_out);

}  // namespace sehsn::nn
