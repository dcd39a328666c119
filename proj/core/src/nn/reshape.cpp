#include "sehsn/nn/reshape.hpp"

#include <algorithm>
#include <string>

#include "sehsn/error.hpp"

namespace sehsn::nn {

template <typename T>
Tensor<T> merge_channels(Tensor<T> input) {
  if (input.rank() != 5) throw ShapeError("merge_channels: expected rank 5, got " + shape_string(input.shape()));
  const Shape s = input.shape();
  input.reshape({s[0], s[1] * s[2], s[3], s[4]});
  return input;
}

template <typename T>
Tensor<T> split_channels(Tensor<T> input, std::size_t groups) {
  if (input.rank() != 4 || groups == 0 || input.dim(1) % groups != 0) {
    throw ShapeError("split_channels: cannot split " + shape_string(input.shape()) + " into " +
                     std::to_string(groups) + " groups");
  }
  const Shape s = input.shape();
  input.reshape({s[0], groups, s[1] / groups, s[2], s[3]});
  return input;
}

template <typename T>
Tensor<T> pad_spatial(const Tensor<T>& input, std::size_t pad_h, std::size_t pad_w) {
  if (input.rank() < 2) throw ShapeError("pad_spatial: rank must be >= 2");
  if (pad_h == 0 && pad_w == 0) return input;
  Shape s = input.shape();
  const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
  const std::size_t outer = input.size() / (h * w);
  s[s.size() - 2] = h + 2 * pad_h;
  s[s.size() - 1] = w + 2 * pad_w;
  Tensor<T> out(s);
  const std::size_t ph = h + 2 * pad_h, pw = w + 2 * pad_w;
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t y = 0; y < h; ++y) {
      const T* src = input.data() + (o * h + y) * w;
      std::copy(src, src + w, out.data() + (o * ph + y + pad_h) * pw + pad_w);
    }
  }
  return out;
}

template <typename T>
Tensor<T> unpad_spatial(const Tensor<T>& grad, std::size_t pad_h, std::size_t pad_w) {
  if (pad_h == 0 && pad_w == 0) return grad;
  Shape s = grad.shape();
  const std::size_t ph = s[s.size() - 2], pw = s[s.size() - 1];
  if (ph <= 2 * pad_h || pw <= 2 * pad_w) throw ShapeError("unpad_spatial: padding exceeds extent");
  const std::size_t h = ph - 2 * pad_h, w = pw - 2 * pad_w;
  const std::size_t outer = grad.size() / (ph * pw);
  s[s.size() - 2] = h;
  s[s.size() - 1] = w;
  Tensor<T> out(s);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t y = 0; y < h; ++y) {
      const T* src = grad.data() + (o * ph + y + pad_h) * pw + pad_w;
      std::copy(src, src + w, out.data() + (o * h + y) * w);
    }
  }
  return out;
}

namespace {

struct CropPlan {
  std::size_t outer;  // B*C
  std::size_t d, h, w;
  std::size_t cd, ch, cw;
  std::size_t od, oh, ow;  // offsets
};

CropPlan plan_crop(const Shape& in, std::size_t depth, std::size_t height, std::size_t width) {
  if (in.size() != 5) throw ShapeError("center_crop: expected rank 5, got " + shape_string(in));
  const std::size_t d = in[2], h = in[3], w = in[4];
  if (depth > d || height > h || width > w || (d - depth) % 2 || (h - height) % 2 || (w - width) % 2) {
    throw ShapeError("center_crop: cannot center-crop " + shape_string(in) + " to " + std::to_string(depth) +
                     "x" + std::to_string(height) + "x" + std::to_string(width));
  }
  return {in[0] * in[1], d, h, w, depth, height, width, (d - depth) / 2, (h - height) / 2, (w - width) / 2};
}

}  // namespace

template <typename T>
Tensor<T> center_crop(const Tensor<T>& input, std::size_t depth, std::size_t height, std::size_t width) {
  const CropPlan p = plan_crop(input.shape(), depth, height, width);
  if (p.cd == p.d && p.ch == p.h && p.cw == p.w) return input;
  Tensor<T> out({input.dim(0), input.dim(1), depth, height, width});
  for (std::size_t o = 0; o < p.outer; ++o) {
    for (std::size_t z = 0; z < p.cd; ++z) {
      for (std::size_t y = 0; y < p.ch; ++y) {
        const T* src = input.data() + ((o * p.d + z + p.od) * p.h + y + p.oh) * p.w + p.ow;
        std::copy(src, src + p.cw, out.data() + ((o * p.cd + z) * p.ch + y) * p.cw);
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> center_crop_backward(const Tensor<T>& grad, const Shape& input_shape) {
  if (grad.rank() != 5) throw ShapeError("center_crop_backward: expected rank 5");
  const CropPlan p = plan_crop(input_shape, grad.dim(2), grad.dim(3), grad.dim(4));
  if (p.cd == p.d && p.ch == p.h && p.cw == p.w) return grad;
  Tensor<T> out(input_shape);
  for (std::size_t o = 0; o < p.outer; ++o) {
    for (std::size_t z = 0; z < p.cd; ++z) {
      for (std::size_t y = 0; y < p.ch; ++y) {
        const T* src = grad.data() + ((o * p.cd + z) * p.ch + y) * p.cw;
        std::copy(src, src + p.cw, out.data() + ((o * p.d + z + p.od) * p.h + y + p.oh) * p.w + p.ow);
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>* const> parts) {
  if (parts.empty()) throw ShapeError("concat_channels: nothing to concatenate");
  Shape s = parts[0]->shape();
  if (s.size() < 2) throw ShapeError("concat_channels: rank must be >= 2");
  std::size_t channels = 0;
  for (const auto* t : parts) {
    Shape ts = t->shape();
    if (ts.size() != s.size()) throw ShapeError("concat_channels: rank mismatch");
    channels += ts[1];
    ts[1] = s[1];
    if (ts != s) throw ShapeError("concat_channels: extents other than axis 1 differ");
  }
  const std::size_t batch = s[0];
  const std::size_t inner = shape_size(s) / (s[0] * s[1]);
  s[1] = channels;
  Tensor<T> out(s);
  for (std::size_t b = 0; b < batch; ++b) {
    T* dst = out.data() + b * channels * inner;
    for (const auto* t : parts) {
      const std::size_t n = t->dim(1) * inner;
      const T* src = t->data() + b * n;
      std::copy(src, src + n, dst);
      dst += n;
    }
  }
  return out;
}

template <typename T>
std::vector<Tensor<T>> split_concat(const Tensor<T>& grad, std::span<const std::size_t> channel_counts) {
  const std::size_t batch = grad.dim(0);
  const std::size_t inner = grad.size() / (grad.dim(0) * grad.dim(1));
  std::size_t total = 0;
  for (auto c : channel_counts) total += c;
  if (total != grad.dim(1)) throw ShapeError("split_concat: channel counts do not sum to axis 1");
  std::vector<Tensor<T>> parts;
  for (auto c : channel_counts) {
    Shape s = grad.shape();
    s[1] = c;
    parts.emplace_back(s);
  }
  for (std::size_t b = 0; b < batch; ++b) {
    const T* src = grad.data() + b * total * inner;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const std::size_t n = channel_counts[i] * inner;
      std::copy(src, src + n, parts[i].data() + b * n);
      src += n;
    }
  }
  return parts;
}

#define SEHSN_INSTANTIATE_RESHAPE(T)                                                            \
  template Tensor<T> merge_channels(Tensor<T>);                                                 \
  template Tensor<T> split_channels(Tensor<T>, std::size_t);                                    \
  template Tensor<T> pad_spatial(const Tensor<T>&, std::size_t, std::size_t);                   \
  template Tensor<T> unpad_spatial(const Tensor<T>&, std::size_t, std::size_t);                 \
  template Tensor<T> center_crop(const Tensor<T>&, std::size_t, std::size_t, std::size_t);      \
  template Tensor<T> center_crop_backward(const Tensor<T>&, const Shape&);                      \
  template Tensor<T> concat_channels(std::span<const Tensor<T>* const>);                        \
  template std::vector<Tensor<T>> split_concat(const Tensor<T>&, std::span<const std::size_t>);

SEHSN_INSTANTIATE_RESHAPE(float)
SEHSN_INSTANTIATE_RESHAPE(double)

}  // namespace sehsn::nn
