#pragma once

#include <cstddef>

#include "sehsn/nn/tensor.hpp"

namespace sehsn::nn {

struct Extent3 {
  std::size_t depth = 1;   // spectral
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t volume() const { return depth * height * width; }
  friend bool operator==(const Extent3&, const Extent3&) = default;
};

// 3D convolution over (spectral, row, col). Weights are
// [out, in, depth, height, width]; bias is [out]. "Valid" support: the
// output loses kernel-1 positions along each axis. The result is the
// pre-activation; apply relu_forward separately.
template <typename T>
struct Conv3d {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  Extent3 kernel;
  Tensor<T> weight;
  Tensor<T> bias;

  Conv3d() = default;
  Conv3d(std::size_t in, std::size_t out, Extent3 k);
  std::size_t parameter_count() const { return weight.size() + bias.size(); }
};

// 2D convolution over (row, col); weights [out, in, height, width].
template <typename T>
struct Conv2d {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  Tensor<T> weight;
  Tensor<T> bias;

  Conv2d() = default;
  Conv2d(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw);
  std::size_t parameter_count() const { return weight.size() + bias.size(); }
};

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

// input [B, C, D, H, W] -> [B, out, D-kd+1, H-kh+1, W-kw+1]
template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& input, const Conv3d<T>& layer);

// The forward input is the only cached quantity.
template <typename T>
ConvGrads<T> conv3d_backward(const Tensor<T>& input, const Conv3d<T>& layer, const Tensor<T>& grad_out);

// input [B, C, H, W] -> [B, out, H-kh+1, W-kw+1]
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Conv2d<T>& layer);

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Conv2d<T>& layer, const Tensor<T>& grad_out);

}  // namespace sehsn::nn
