#include "sehsn/train/optimizer.hpp"

#include <cmath>
#include <string>

#include "sehsn/error.hpp"

namespace sehsn::train {

template <typename T>
void adam_step(nn::Tensor<T>& param, const nn::Tensor<T>& grad, AdamMoments<T>& state, std::uint64_t t,
               const OptimizerConfig& cfg) {
  grad.expect_shape(param.shape(), "adam_step grad");
  if (state.m.empty() && state.v.empty()) {
    state.m = nn::Tensor<T>(param.shape());
    state.v = nn::Tensor<T>(param.shape());
  }
  state.m.expect_shape(param.shape(), "adam_step first moment");
  state.v.expect_shape(param.shape(), "adam_step second moment");
  if (t == 0) throw ConfigError("adam_step: step counter is 1-based");
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = static_cast<double>(grad[i]);
    const double m = cfg.beta1 * static_cast<double>(state.m[i]) + (1.0 - cfg.beta1) * g;
    const double v = cfg.beta2 * static_cast<double>(state.v[i]) + (1.0 - cfg.beta2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    const double update = cfg.learning_rate * (m / c1) / (std::sqrt(v / c2) + cfg.eps);
    param[i] = static_cast<T>(static_cast<double>(param[i]) - update);
  }
}

template <typename T>
void sgd_step(nn::Tensor<T>& param, const nn::Tensor<T>& grad, nn::Tensor<T>& velocity, const OptimizerConfig& cfg) {
  grad.expect_shape(param.shape(), "sgd_step grad");
  if (velocity.empty()) velocity = nn::Tensor<T>(param.shape());
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = static_cast<T>(cfg.momentum * static_cast<double>(velocity[i]) + static_cast<double>(grad[i]));
    param[i] = static_cast<T>(static_cast<double>(param[i]) - cfg.learning_rate * static_cast<double>(velocity[i]));
  }
}

template <typename T>
Optimizer<T>::Optimizer(OptimizerConfig cfg) : cfg_(cfg) {
  if (!(cfg_.learning_rate >= 0.0)) throw ConfigError("optimizer: learning_rate must be >= 0");
  if (!(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0 && cfg_.beta2 >= 0.0 && cfg_.beta2 < 1.0)) {
    throw ConfigError("optimizer: Adam betas must lie in [0, 1)");
  }
  if (!(cfg_.eps > 0.0)) throw ConfigError("optimizer: eps must be > 0");
}

template <typename T>
void Optimizer<T>::step(std::span<const model::ParamRef<T>> params) {
  ++t_;
  if (cfg_.kind == OptimizerKind::kAdam) {
    if (adam_.empty()) adam_.resize(params.size());
    if (adam_.size() != params.size()) throw ShapeError("optimizer: parameter list changed between steps");
    for (std::size_t i = 0; i < params.size(); ++i) adam_step(*params[i].value, *params[i].grad, adam_[i], t_, cfg_);
  } else {
    if (velocity_.empty()) velocity_.resize(params.size());
    if (velocity_.size() != params.size()) throw ShapeError("optimizer: parameter list changed between steps");
    for (std::size_t i = 0; i < params.size(); ++i) sgd_step(*params[i].value, *params[i].grad, velocity_[i], cfg_);
  }
}

template void adam_step(nn::Tensor<float>&, const nn::Tensor<float>&, AdamMoments<float>&, std::uint64_t,
                        const OptimizerConfig&);
template void adam_step(nn::Tensor<double>&, const nn::Tensor<double>&, AdamMoments<double>&, std::uint64_t,
                        const OptimizerConfig&);
template void sgd_step(nn::Tensor<float>&, const nn::Tensor<float>&, nn::Tensor<float>&, const OptimizerConfig&);
template void sgd_step(nn::Tensor<double>&, const nn::Tensor<double>&, nn::Tensor<double>&, const OptimizerConfig&);
template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace sehsn::train
