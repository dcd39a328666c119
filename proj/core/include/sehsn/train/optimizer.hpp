#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sehsn/model/network.hpp"
#include "sehsn/nn/tensor.hpp"

namespace sehsn::train {

enum class OptimizerKind { kAdam, kSgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double momentum = 0.0;  // SGD only

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

template <typename T>
struct AdamMoments {
  nn::Tensor<T> m;
  nn::Tensor<T> v;
};

// One Adam update of p with bias correction for step t (1-based):
//   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
//   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
template <typename T>
void adam_step(nn::Tensor<T>& param, const nn::Tensor<T>& grad, AdamMoments<T>& state, std::uint64_t t,
               const OptimizerConfig& cfg);

// p -= lr * (momentum * buf + g), buf updated in place.
template <typename T>
void sgd_step(nn::Tensor<T>& param, const nn::Tensor<T>& grad, nn::Tensor<T>& velocity, const OptimizerConfig& cfg);

template <typename T>
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg);
  // Applies one update to every parameter from its gradient.
  void step(std::span<const model::ParamRef<T>> params);
  std::uint64_t steps() const { return t_; }

 private:
  OptimizerConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<AdamMoments<T>> adam_;
  std::vector<nn::Tensor<T>> velocity_;
};

}  // namespace sehsn::train
