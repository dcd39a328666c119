#include "sehsn/nn/conv.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "sehsn/error.hpp"
#include "sehsn/nn/gemm.hpp"

namespace sehsn::nn {
namespace {

struct Geometry {
  std::size_t batch, channels, depth, height, width;
  std::size_t out_channels;
  Extent3 kernel;
  std::size_t od() const { return depth - kernel.depth + 1; }
  std::size_t oh() const { return height - kernel.height + 1; }
  std::size_t ow() const { return width - kernel.width + 1; }
  std::size_t in_volume() const { return depth * height * width; }
  std::size_t out_volume() const { return od() * oh() * ow(); }
  std::size_t col_rows() const { return channels * kernel.volume(); }
};

// col[(c, a, b, e), (z, y, x)] = in[c, z+a, y+b, x+e]
template <typename T>
void vol2col(const T* in, const Geometry& g, T* col) {
  const std::size_t od = g.od(), oh = g.oh(), ow = g.ow();
  const std::size_t ncols = g.out_volume();
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t a = 0; a < g.kernel.depth; ++a) {
      for (std::size_t b = 0; b < g.kernel.height; ++b) {
        for (std::size_t e = 0; e < g.kernel.width; ++e, ++row) {
          T* dst = col + row * ncols;
          for (std::size_t z = 0; z < od; ++z) {
            for (std::size_t y = 0; y < oh; ++y) {
              const T* src = in + ((c * g.depth + z + a) * g.height + y + b) * g.width + e;
              std::copy(src, src + ow, dst);
              dst += ow;
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2vol_add(const T* col, const Geometry& g, T* in) {
  const std::size_t od = g.od(), oh = g.oh(), ow = g.ow();
  const std::size_t ncols = g.out_volume();
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t a = 0; a < g.kernel.depth; ++a) {
      for (std::size_t b = 0; b < g.kernel.height; ++b) {
        for (std::size_t e = 0; e < g.kernel.width; ++e, ++row) {
          const T* src = col + row * ncols;
          for (std::size_t z = 0; z < od; ++z) {
            for (std::size_t y = 0; y < oh; ++y) {
              T* dst = in + ((c * g.depth + z + a) * g.height + y + b) * g.width + e;
              for (std::size_t x = 0; x < ow; ++x) dst[x] += src[x];
              src += ow;
            }
          }
        }
      }
    }
  }
}

template <typename T>
Geometry check_geometry(const Tensor<T>& input, std::size_t in_channels, std::size_t out_channels,
                        Extent3 kernel, const char* op) {
  if (input.rank() != 5) {
    throw ShapeError(std::string(op) + ": expected a rank-5 input, got " + shape_string(input.shape()));
  }
  Geometry g{input.dim(0), input.dim(1), input.dim(2), input.dim(3), input.dim(4), out_channels, kernel};
  if (g.channels != in_channels) {
    throw ShapeError(std::string(op) + ": input has " + std::to_string(g.channels) +
                     " channels, layer expects " + std::to_string(in_channels));
  }
  if (g.depth < kernel.depth || g.height < kernel.height || g.width < kernel.width) {
    throw ShapeError(std::string(op) + ": input " + shape_string(input.shape()) +
                     " is smaller than the kernel");
  }
  return g;
}

template <typename T>
Tensor<T> forward_impl(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                       const Geometry& g) {
  Tensor<T> out({g.batch, g.out_channels, g.od(), g.oh(), g.ow()});
  const std::size_t p = g.out_volume();
  const std::size_t kc = g.col_rows();
  const bool pointwise = g.kernel.volume() == 1;
  std::vector<T> col(pointwise ? 0 : kc * p);
  for (std::size_t b = 0; b < g.batch; ++b) {
    const T* in_b = input.data() + b * g.channels * g.in_volume();
    const T* cols = in_b;
    if (!pointwise) {
      vol2col(in_b, g, col.data());
      cols = col.data();
    }
    T* out_b = out.data() + b * g.out_channels * p;
    gemm(g.out_channels, p, kc, weight.data(), cols, out_b, false);
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      const T bo = bias[o];
      T* row = out_b + o * p;
      for (std::size_t i = 0; i < p; ++i) row[i] += bo;
    }
  }
  return out;
}

template <typename T>
ConvGrads<T> backward_impl(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& grad_out,
                           const Geometry& g, Shape out_shape) {
  grad_out.expect_shape(out_shape, "conv backward grad_out");
  ConvGrads<T> grads{Tensor<T>(input.shape()), Tensor<T>(weight.shape()), Tensor<T>({g.out_channels})};
  const std::size_t p = g.out_volume();
  const std::size_t kc = g.col_rows();
  const bool pointwise = g.kernel.volume() == 1;
  std::vector<T> col(pointwise ? 0 : kc * p);
  std::vector<T> grad_col(kc * p);
  for (std::size_t b = 0; b < g.batch; ++b) {
    const T* in_b = input.data() + b * g.channels * g.in_volume();
    const T* g_b = grad_out.data() + b * g.out_channels * p;
    const T* cols = in_b;
    if (!pointwise) {
      vol2col(in_b, g, col.data());
      cols = col.data();
    }
    gemm_nt(g.out_channels, kc, p, g_b, cols, grads.weight.data(), true);
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      T acc{0};
      for (std::size_t i = 0; i < p; ++i) acc += g_b[o * p + i];
      grads.bias[o] += acc;
    }
    T* gin_b = grads.input.data() + b * g.channels * g.in_volume();
    if (pointwise) {
      gemm_tn(kc, p, g.out_channels, weight.data(), g_b, gin_b, false);
    } else {
      gemm_tn(kc, p, g.out_channels, weight.data(), g_b, grad_col.data(), false);
      col2vol_add(grad_col.data(), g, gin_b);
    }
  }
  return grads;
}

}  // namespace

template <typename T>
Conv3d<T>::Conv3d(std::size_t in, std::size_t out, Extent3 k)
    : in_channels(in),
      out_channels(out),
      kernel(k),
      weight({out, in, k.depth, k.height, k.width}),
      bias({out}) {
  if (in == 0 || out == 0) throw ConfigError("Conv3d: channel counts must be >= 1");
  if (k.depth % 2 == 0 || k.height % 2 == 0 || k.width % 2 == 0) {
    throw ConfigError("Conv3d: kernel extents must be odd");
  }
}

template <typename T>
Conv2d<T>::Conv2d(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw)
    : in_channels(in), out_channels(out), kernel_h(kh), kernel_w(kw), weight({out, in, kh, kw}), bias({out}) {
  if (in == 0 || out == 0) throw ConfigError("Conv2d: channel counts must be >= 1");
  if (kh % 2 == 0 || kw % 2 == 0) throw ConfigError("Conv2d: kernel extents must be odd");
}

template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& input, const Conv3d<T>& layer) {
  const Geometry g = check_geometry(input, layer.in_channels, layer.out_channels, layer.kernel, "conv3d_forward");
  return forward_impl(input, layer.weight, layer.bias, g);
}

template <typename T>
ConvGrads<T> conv3d_backward(const Tensor<T>& input, const Conv3d<T>& layer, const Tensor<T>& grad_out) {
  const Geometry g = check_geometry(input, layer.in_channels, layer.out_channels, layer.kernel, "conv3d_backward");
  return backward_impl(input, layer.weight, grad_out, g, {g.batch, g.out_channels, g.od(), g.oh(), g.ow()});
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Conv2d<T>& layer) {
  if (input.rank() != 4) {
    throw ShapeError("conv2d_forward: expected a rank-4 input, got " + shape_string(input.shape()));
  }
  const Tensor<T> as5 = input.reshaped({input.dim(0), input.dim(1), 1, input.dim(2), input.dim(3)});
  const Geometry g = check_geometry(as5, layer.in_channels, layer.out_channels,
                                    Extent3{1, layer.kernel_h, layer.kernel_w}, "conv2d_forward");
  Tensor<T> out = forward_impl(as5, layer.weight, layer.bias, g);
  out.reshape({g.batch, g.out_channels, g.oh(), g.ow()});
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Conv2d<T>& layer, const Tensor<T>& grad_out) {
  if (input.rank() != 4) {
    throw ShapeError("conv2d_backward: expected a rank-4 input, got " + shape_string(input.shape()));
  }
  const Tensor<T> as5 = input.reshaped({input.dim(0), input.dim(1), 1, input.dim(2), input.dim(3)});
  const Geometry g = check_geometry(as5, layer.in_channels, layer.out_channels,
                                    Extent3{1, layer.kernel_h, layer.kernel_w}, "conv2d_backward");
  grad_out.expect_shape({g.batch, g.out_channels, g.oh(), g.ow()}, "conv2d_backward grad_out");
  ConvGrads<T> grads = backward_impl(as5, layer.weight, grad_out.reshaped({g.batch, g.out_channels, 1, g.oh(), g.ow()}),
                                     g, {g.batch, g.out_channels, 1, g.oh(), g.ow()});
  grads.input.reshape(input.shape());
  return grads;
}

#define SEHSN_INSTANTIATE_CONV(T)                                                                 \
  template struct Conv3d<T>;                                                                      \
  template struct Conv2d<T>;                                                                      \
  template Tensor<T> conv3d_forward(const Tensor<T>&, const Conv3d<T>&);                          \
  template ConvGrads<T> conv3d_backward(const Tensor<T>&, const Conv3d<T>&, const Tensor<T>&);    \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Conv2d<T>&);                          \
  template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Conv2d<T>&, const Tensor<T>&);

SEHSN_INSTANTIATE_CONV(float)
SEHSN_INSTANTIATE_CONV(double)

}  // namespace sehsn::nn
