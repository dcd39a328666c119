#include "sehsn/nn/se_block.hpp"

#include <string>

#include "sehsn/error.hpp"
#include "sehsn/nn/activation.hpp"

namespace sehsn::nn {

template <typename T>
SeBlock<T>::SeBlock(std::size_t c, std::size_t r) : channels(c), reduction(r) {
  if (r == 0 || c == 0 || c % r != 0) {
    throw ConfigError("SeBlock: reduction " + std::to_string(r) + " must divide channels " + std::to_string(c));
  }
  fc1 = Dense<T>(c, c / r);
  fc2 = Dense<T>(c / r, c);
}

template <typename T>
Tensor<T> se_forward(const Tensor<T>& input, const SeBlock<T>& block, SeCache<T>* cache, bool unit_gate) {
  if (input.rank() != 4 || input.dim(1) != block.channels) {
    throw ShapeError("se_forward: input " + shape_string(input.shape()) + " for " +
                     std::to_string(block.channels) + " channels");
  }
  const std::size_t batch = input.dim(0), ch = input.dim(1), hw = input.dim(2) * input.dim(3);
  if (unit_gate) {
    if (cache) {
      *cache = SeCache<T>{};
      cache->unit_gate = true;
      cache->input = input;
    }
    return input;
  }
  Tensor<T> squeeze({batch, ch});
  for (std::size_t i = 0; i < batch * ch; ++i) {
    const T* p = input.data() + i * hw;
    T acc{0};
    for (std::size_t j = 0; j < hw; ++j) acc += p[j];
    squeeze[i] = acc / static_cast<T>(hw);
  }
  Tensor<T> hidden = relu_forward(dense_forward(squeeze, block.fc1));
  Tensor<T> gate = dense_forward(hidden, block.fc2);
  for (auto& v : gate.values()) v = sigmoid(v);

  Tensor<T> out(input.shape());
  for (std::size_t i = 0; i < batch * ch; ++i) {
    const T e = gate[i];
    const T* p = input.data() + i * hw;
    T* o = out.data() + i * hw;
    for (std::size_t j = 0; j < hw; ++j) o[j] = p[j] * e;
  }
  if (cache) {
    cache->input = input;
    cache->squeeze = std::move(squeeze);
    cache->hidden = std::move(hidden);
    cache->gate = std::move(gate);
    cache->unit_gate = false;
  }
  return out;
}

template <typename T>
SeGrads<T> se_backward(const SeCache<T>& cache, const SeBlock<T>& block, const Tensor<T>& grad_out) {
  grad_out.expect_shape(cache.input.shape(), "se_backward grad_out");
  SeGrads<T> g;
  if (cache.unit_gate) {
    g.input = grad_out;
    g.fc1 = {Tensor<T>(), Tensor<T>(block.fc1.weight.shape()), Tensor<T>(block.fc1.bias.shape())};
    g.fc2 = {Tensor<T>(), Tensor<T>(block.fc2.weight.shape()), Tensor<T>(block.fc2.bias.shape())};
    return g;
  }
  const Tensor<T>& x = cache.input;
  const std::size_t batch = x.dim(0), ch = x.dim(1), hw = x.dim(2) * x.dim(3);

  // Scale branch: d out / d gate.
  Tensor<T> grad_pre({batch, ch});
  g.input = Tensor<T>(x.shape());
  for (std::size_t i = 0; i < batch * ch; ++i) {
    const T e = cache.gate[i];
    const T* xp = x.data() + i * hw;
    const T* gp = grad_out.data() + i * hw;
    T* gi = g.input.data() + i * hw;
    T acc{0};
    for (std::size_t j = 0; j < hw; ++j) {
      acc += gp[j] * xp[j];
      gi[j] = gp[j] * e;
    }
    grad_pre[i] = acc * e * (T{1} - e);
  }
  g.fc2 = dense_backward(cache.hidden, block.fc2, grad_pre);
  Tensor<T> grad_z = relu_backward(cache.hidden, g.fc2.input);
  g.fc1 = dense_backward(cache.squeeze, block.fc1, grad_z);

  // Squeeze branch: the mean spreads evenly over H x W.
  for (std::size_t i = 0; i < batch * ch; ++i) {
    const T s = g.fc1.input[i] / static_cast<T>(hw);
    T* gi = g.input.data() + i * hw;
    for (std::size_t j = 0; j < hw; ++j) gi[j] += s;
  }
  return g;
}

template struct SeBlock<float>;
template struct SeBlock<double>;
template Tensor<float> se_forward(const Tensor<float>&, const SeBlock<float>&, SeCache<float>*, bool);
template Tensor<double> se_forward(const Tensor<double>&, const SeBlock<double>&, SeCache<double>*, bool);
template SeGrads<float> se_backward(const SeCache<float>&, const SeBlock<float>&, const Tensor<float>&);
template SeGrads<double> se_backward(const SeCache<double>&, const SeBlock<double>&, const Tensor<double>&);

}  // namespace sehsn::nn
