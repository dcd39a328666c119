#include "sehsn/nn/depthwise.hpp"

#include <string>

#include "sehsn/error.hpp"
#include "sehsn/nn/reshape.hpp"

namespace sehsn::nn {

template <typename T>
DepthwiseSeparableConv2d<T>::DepthwiseSeparableConv2d(std::size_t in, std::size_t out, std::size_t k,
                                                      std::size_t pad)
    : channels(in), out_channels(out), kernel(k), padding(pad), depthwise({in, k, k}), pointwise(in, out, 1, 1) {
  if (k % 2 == 0) throw ConfigError("DepthwiseSeparableConv2d: kernel must be odd");
}

template <typename T>
Tensor<T> depthwise_conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernels) {
  if (input.rank() != 4 || kernels.rank() != 3 || kernels.dim(0) != input.dim(1) ||
      kernels.dim(1) > input.dim(2) || kernels.dim(2) > input.dim(3)) {
    throw ShapeError("depthwise_conv2d_forward: input " + shape_string(input.shape()) + " vs kernels " +
                     shape_string(kernels.shape()));
  }
  const std::size_t batch = input.dim(0), ch = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t kh = kernels.dim(1), kw = kernels.dim(2);
  const std::size_t oh = h - kh + 1, ow = w - kw + 1;
  Tensor<T> out({batch, ch, oh, ow});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      const T* in = input.data() + (b * ch + c) * h * w;
      const T* k = kernels.data() + c * kh * kw;
      T* o = out.data() + (b * ch + c) * oh * ow;
      for (std::size_t a = 0; a < kh; ++a) {
        for (std::size_t e = 0; e < kw; ++e) {
          const T kv = k[a * kw + e];
          for (std::size_t y = 0; y < oh; ++y) {
            const T* src = in + (y + a) * w + e;
            T* dst = o + y * ow;
            for (std::size_t x = 0; x < ow; ++x) dst[x] += kv * src[x];
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
void depthwise_conv2d_backward(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& grad_out,
                               Tensor<T>& grad_input, Tensor<T>& grad_kernels) {
  const std::size_t batch = input.dim(0), ch = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t kh = kernels.dim(1), kw = kernels.dim(2);
  const std::size_t oh = h - kh + 1, ow = w - kw + 1;
  grad_out.expect_shape({batch, ch, oh, ow}, "depthwise_conv2d_backward grad_out");
  grad_input = Tensor<T>(input.shape());
  grad_kernels = Tensor<T>(kernels.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      const T* in = input.data() + (b * ch + c) * h * w;
      const T* k = kernels.data() + c * kh * kw;
      const T* g = grad_out.data() + (b * ch + c) * oh * ow;
      T* gi = grad_input.data() + (b * ch + c) * h * w;
      T* gk = grad_kernels.data() + c * kh * kw;
      for (std::size_t a = 0; a < kh; ++a) {
        for (std::size_t e = 0; e < kw; ++e) {
          const T kv = k[a * kw + e];
          T acc{0};
          for (std::size_t y = 0; y < oh; ++y) {
            const T* src = in + (y + a) * w + e;
            const T* gr = g + y * ow;
            T* dst = gi + (y + a) * w + e;
            for (std::size_t x = 0; x < ow; ++x) {
              acc += gr[x] * src[x];
              dst[x] += kv * gr[x];
            }
          }
          gk[a * kw + e] += acc;
        }
      }
    }
  }
}

template <typename T>
Tensor<T> depthwise_separable_forward(const Tensor<T>& input, const DepthwiseSeparableConv2d<T>& layer,
                                      DepthwiseSeparableCache<T>* cache) {
  if (input.rank() != 4 || input.dim(1) != layer.channels) {
    throw ShapeError("depthwise_separable_forward: input " + shape_string(input.shape()) + " expects " +
                     std::to_string(layer.channels) + " channels");
  }
  Tensor<T> padded = pad_spatial(input, layer.padding, layer.padding);
  Tensor<T> dw = depthwise_conv2d_forward(padded, layer.depthwise);
  Tensor<T> out = conv2d_forward(dw, layer.pointwise);
  if (cache) {
    cache->padded_input = std::move(padded);
    cache->depthwise_output = std::move(dw);
  }
  return out;
}

template <typename T>
DepthwiseSeparableGrads<T> depthwise_separable_backward(const DepthwiseSeparableCache<T>& cache,
                                                        const DepthwiseSeparableConv2d<T>& layer,
                                                        const Tensor<T>& grad_out) {
  if (cache.padded_input.empty()) throw ShapeError("depthwise_separable_backward: empty cache");
  ConvGrads<T> pw = conv2d_backward(cache.depthwise_output, layer.pointwise, grad_out);
  DepthwiseSeparableGrads<T> grads;
  grads.pointwise_weight = std::move(pw.weight);
  grads.pointwise_bias = std::move(pw.bias);
  Tensor<T> grad_padded;
  depthwise_conv2d_backward(cache.padded_input, layer.depthwise, pw.input, grad_padded, grads.depthwise);
  grads.input = unpad_spatial(grad_padded, layer.padding, layer.padding);
  return grads;
}

#define SEHSN_INSTANTIATE_DW(T)                                                                          \
  template struct DepthwiseSeparableConv2d<T>;                                                           \
  template Tensor<T> depthwise_conv2d_forward(const Tensor<T>&, const Tensor<T>&);                       \
  template void depthwise_conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,          \
                                          Tensor<T>&, Tensor<T>&);                                       \
  template Tensor<T> depthwise_separable_forward(const Tensor<T>&, const DepthwiseSeparableConv2d<T>&,   \
                                                 DepthwiseSeparableCache<T>*);                           \
  template DepthwiseSeparableGrads<T> depthwise_separable_backward(                                      \
      const DepthwiseSeparableCache<T>&, const DepthwiseSeparableConv2d<T>&, const Tensor<T>&);

SEHSN_INSTANTIATE_DW(float)
SEHSN_INSTANTIATE_DW(double)

}  // namespace sehsn::nn
