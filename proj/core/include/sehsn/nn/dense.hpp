#pragma once

#include <cstddef>

#include "sehsn/nn/tensor.hpp"

namespace sehsn::nn {

// y = W x + b with W [out, in]; inputs are [B, in].
template <typename T>
struct Dense {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Tensor<T> weight;
  Tensor<T> bias;

  Dense() = default;
  Dense(std::size_t in, std::size_t out);
  std::size_t parameter_count() const { return weight.size() + bias.size(); }
};

template <typename T>
struct DenseGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Dense<T>& layer);

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& input, const Dense<T>& layer, const Tensor<T>& grad_out);

}  // namespace sehsn::nn
