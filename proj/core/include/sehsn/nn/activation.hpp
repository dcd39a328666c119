#pragma once

#include <cstdint>

#include "sehsn/nn/tensor.hpp"

namespace sehsn::nn {

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input);

// Uses the forward output as the cache (y > 0 iff x > 0).
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& output, const Tensor<T>& grad_out);

template <typename T>
T sigmoid(T x);

// Inverted dropout. In training every element is kept with probability
// 1 - rate and scaled by 1/(1 - rate); `mask` receives the per-element
// multiplier. Inference is the identity and leaves mask empty.
template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& input, double rate, std::uint64_t seed, bool training,
                          Tensor<T>* mask = nullptr);

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, const Tensor<T>& grad_out);

}  // namespace sehsn::nn
