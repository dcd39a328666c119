#include "sehsn/nn/activation.hpp"

#include <cmath>

#include "sehsn/error.hpp"
#include "sehsn/random.hpp"

namespace sehsn::nn {

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input) {
  Tensor<T> out = input;
  for (auto& v : out.values()) v = v > T{0} ? v : T{0};
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& output, const Tensor<T>& grad_out) {
  grad_out.expect_shape(output.shape(), "relu_backward");
  Tensor<T> g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(output[i] > T{0})) g[i] = T{0};
  }
  return g;
}

template <typename T>
T sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& input, double rate, std::uint64_t seed, bool training,
                          Tensor<T>* mask) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) {
    if (mask) *mask = Tensor<T>(input.shape(), T{1});
    return input;
  }
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  Pcg32 rng(seed);
  Tensor<T> m(input.shape());
  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    m[i] = rng.uniform() < rate ? T{0} : scale;
    out[i] = input[i] * m[i];
  }
  if (mask) *mask = std::move(m);
  return out;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, const Tensor<T>& grad_out) {
  grad_out.expect_shape(mask.shape(), "dropout_backward");
  Tensor<T> g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask[i];
  return g;
}

#define SEHSN_INSTANTIATE_ACT(T)                                                                  \
  template Tensor<T> relu_forward(const Tensor<T>&);                                              \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                           \
  template T sigmoid(T);                                                                          \
  template Tensor<T> dropout_forward(const Tensor<T>&, double, std::uint64_t, bool, Tensor<T>*);  \
  template Tensor<T> dropout_backward(const Tensor<T>&, const Tensor<T>&);

SEHSN_INSTANTIATE_ACT(float)
SEHSN_INSTANTIATE_ACT(double)

}  // namespace sehsn::nn
