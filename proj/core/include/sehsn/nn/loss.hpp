#pragma once

#include <cstddef>
#include <span>

#include "sehsn/nn/tensor.hpp"

namespace sehsn::nn {

template <typename T>
struct LossResult {
  double loss = 0.0;     // mean over the batch
  Tensor<T> grad_logits; // (softmax - onehot) / B
};

// Row-wise max-shifted softmax of [B, K] logits.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

// targets are 0-based class indices < K.
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::size_t> targets);

}  // namespace sehsn::nn
