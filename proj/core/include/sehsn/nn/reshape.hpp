#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sehsn/nn/tensor.hpp"

namespace sehsn::nn {

// [B, N, C, H, W] -> [B, N*C, H, W]; element (b, n, c, h, w) lands on
// channel n*C + c. Row-major storage is unchanged, so this is a view.
template <typename T>
Tensor<T> merge_channels(Tensor<T> input);

// Inverse of merge_channels: [B, N*C, H, W] -> [B, N, C, H, W].
template <typename T>
Tensor<T> split_channels(Tensor<T> input, std::size_t groups);

// Zero-pads the last two axes by (pad_h, pad_w) on each side.
template <typename T>
Tensor<T> pad_spatial(const Tensor<T>& input, std::size_t pad_h, std::size_t pad_w);

// Backward of pad_spatial: drops the border.
template <typename T>
Tensor<T> unpad_spatial(const Tensor<T>& grad, std::size_t pad_h, std::size_t pad_w);

// Centered crop of the last three axes of a rank-5 tensor [B, C, D, H, W].
// Each extent must shrink by an even amount.
template <typename T>
Tensor<T> center_crop(const Tensor<T>& input, std::size_t depth, std::size_t height, std::size_t width);

// Backward of center_crop: embeds grad into zeros of the original shape.
template <typename T>
Tensor<T> center_crop_backward(const Tensor<T>& grad, const Shape& input_shape);

// Concatenates along axis 1; all other extents must agree.
template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>* const> parts);

// Backward of concat_channels: slices grad along axis 1.
template <typename T>
std::vector<Tensor<T>> split_concat(const Tensor<T>& grad, std::span<const std::size_t> channel_counts);

}  // namespace sehsn::nn
