#pragma once

#include <cstddef>

#include "sehsn/nn/dense.hpp"
#include "sehsn/nn/tensor.hpp"

namespace sehsn::nn {

// Squeeze-and-excitation over a [B, C, H, W] tensor: global average pool,
// C -> C/r -> C bottleneck (ReLU, then sigmoid), channel rescale.
template <typename T>
struct SeBlock {
  std::size_t channels = 0;
  std::size_t reduction = 1;
  Dense<T> fc1;  // C -> C/r
  Dense<T> fc2;  // C/r -> C

  SeBlock() = default;
  SeBlock(std::size_t c, std::size_t r);
  std::size_t hidden() const { return channels / reduction; }
  std::size_t parameter_count() const { return fc1.parameter_count() + fc2.parameter_count(); }
};

template <typename T>
struct SeCache {
  Tensor<T> input;
  Tensor<T> squeeze;  // [B, C]
  Tensor<T> hidden;   // post-ReLU [B, C/r]
  Tensor<T> gate;     // [B, C]
  bool unit_gate = false;
};

template <typename T>
struct SeGrads {
  Tensor<T> input;
  DenseGrads<T> fc1;
  DenseGrads<T> fc2;
};

// With unit_gate the gate is pinned to 1 (the block becomes the identity),
// which is how SE is ablated without touching the rest of the graph.
template <typename T>
Tensor<T> se_forward(const Tensor<T>& input, const SeBlock<T>& block, SeCache<T>* cache = nullptr,
                     bool unit_gate = false);

template <typename T>
SeGrads<T> se_backward(const SeCache<T>& cache, const SeBlock<T>& block, const Tensor<T>& grad_out);

}  // namespace sehsn::nn
