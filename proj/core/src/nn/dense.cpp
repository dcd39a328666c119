#include "sehsn/nn/dense.hpp"

#include <string>

#include "sehsn/error.hpp"
#include "sehsn/nn/gemm.hpp"

namespace sehsn::nn {

template <typename T>
Dense<T>::Dense(std::size_t in, std::size_t out) : in_dim(in), out_dim(out), weight({out, in}), bias({out}) {
  if (in == 0 || out == 0) throw ConfigError("Dense: dimensions must be >= 1");
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Dense<T>& layer) {
  if (input.rank() != 2 || input.dim(1) != layer.in_dim) {
    throw ShapeError("dense_forward: input " + shape_string(input.shape()) + " for in_dim " +
                     std::to_string(layer.in_dim));
  }
  const std::size_t batch = input.dim(0);
  Tensor<T> out({batch, layer.out_dim});
  gemm_nt(batch, layer.out_dim, layer.in_dim, input.data(), layer.weight.data(), out.data(), false);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < layer.out_dim; ++o) out[b * layer.out_dim + o] += layer.bias[o];
  }
  return out;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& input, const Dense<T>& layer, const Tensor<T>& grad_out) {
  const std::size_t batch = input.dim(0);
  grad_out.expect_shape({batch, layer.out_dim}, "dense_backward grad_out");
  DenseGrads<T> g{Tensor<T>(input.shape()), Tensor<T>(layer.weight.shape()), Tensor<T>({layer.out_dim})};
  gemm(batch, layer.in_dim, layer.out_dim, grad_out.data(), layer.weight.data(), g.input.data(), false);
  gemm_tn(layer.out_dim, layer.in_dim, batch, grad_out.data(), input.data(), g.weight.data(), false);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < layer.out_dim; ++o) g.bias[o] += grad_out[b * layer.out_dim + o];
  }
  return g;
}

template struct Dense<float>;
template struct Dense<double>;
template Tensor<float> dense_forward(const Tensor<float>&, const Dense<float>&);
template Tensor<double> dense_forward(const Tensor<double>&, const Dense<double>&);
template DenseGrads<float> dense_backward(const Tensor<float>&, const Dense<float>&, const Tensor<float>&);
template DenseGrads<double> dense_backward(const Tensor<double>&, const Dense<double>&, const Tensor<double>&);

}  // namespace sehsn::nn
