#include "sehsn/model/predict.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "sehsn/error.hpp"

namespace sehsn::model {

template <typename T>
nn::Tensor<T> make_batch(const io::HyperspectralCube& cube, std::span<const std::uint32_t> pixels,
                         std::size_t window) {
  if (window % 2 == 0) throw ConfigError("make_batch: window must be odd");
  const std::size_t bands = cube.bands(), half = window / 2;
  const auto h = static_cast<std::ptrdiff_t>(cube.height()), w = static_cast<std::ptrdiff_t>(cube.width());
  nn::Tensor<T> out({pixels.size(), 1, bands, window, window});
  const std::size_t plane = window * window;
  for (std::size_t b = 0; b < pixels.size(); ++b) {
    if (pixels[b] >= cube.pixel_count()) throw DataError("make_batch: pixel index out of range");
    const auto row = static_cast<std::ptrdiff_t>(pixels[b] / cube.width());
    const auto col = static_cast<std::ptrdiff_t>(pixels[b] % cube.width());
    T* dst = out.data() + b * bands * plane;
    for (std::size_t r = 0; r < window; ++r) {
      const std::ptrdiff_t y = row + static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(half);
      if (y < 0 || y >= h) continue;
      for (std::size_t c = 0; c < window; ++c) {
        const std::ptrdiff_t x = col + static_cast<std::ptrdiff_t>(c) - static_cast<std::ptrdiff_t>(half);
        if (x < 0 || x >= w) continue;
        const auto px = cube.pixel(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
        for (std::size_t d = 0; d < bands; ++d) dst[d * plane + r * window + c] = static_cast<T>(px[d]);
      }
    }
  }
  return out;
}

template <typename T>
void check_parameters_finite(const Network<T>& net) {
  for (const auto& p : net.parameters()) {
    for (T v : p.value->values()) {
      if (!std::isfinite(static_cast<double>(v))) throw NumericalError("parameter '" + p.name + "' is not finite");
    }
  }
}

template <typename T>
std::vector<std::uint16_t> predict_pixels(const Network<T>& net, const io::HyperspectralCube& cube,
                                          std::span<const std::uint32_t> pixels, const PredictOptions& opt) {
  const ModelConfig& cfg = net.config();
  if (cube.bands() != cfg.pca_k) {
    throw ShapeError("predict: cube has " + std::to_string(cube.bands()) + " bands, model expects " +
                     std::to_string(cfg.pca_k));
  }
  check_parameters_finite(net);
  const std::size_t bs = std::max<std::size_t>(1, opt.batch_size);
  const std::size_t nbatches = (pixels.size() + bs - 1) / bs;
  std::vector<std::uint16_t> labels(pixels.size(), 0);

  auto work = [&](std::size_t first, std::size_t last) {
    for (std::size_t bi = first; bi < last; ++bi) {
      const std::size_t lo = bi * bs, hi = std::min(pixels.size(), lo + bs);
      const nn::Tensor<T> logits = net.predict_logits(make_batch<T>(cube, pixels.subspan(lo, hi - lo), cfg.window));
      nn::check_finite(logits, "predict logits");
      const std::size_t k = cfg.num_classes;
      for (std::size_t i = 0; i < hi - lo; ++i) {
        const T* row = logits.data() + i * k;
        labels[lo + i] = static_cast<std::uint16_t>(std::max_element(row, row + k) - row + 1);
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(opt.threads, 1, std::max<std::size_t>(1, nbatches));
  if (threads == 1) {
    work(0, nbatches);
    return labels;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t first = nbatches * t / threads, last = nbatches * (t + 1) / threads;
    pool.emplace_back([&, t, first, last] {
      try {
        work(first, last);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return labels;
}

template <typename T>
io::GroundTruthMap predict_scene(const Network<T>& net, const io::HyperspectralCube& cube,
                                 const io::GroundTruthMap& gt, bool all_pixels, const PredictOptions& opt) {
  if (gt.height() != cube.height() || gt.width() != cube.width()) {
    throw ShapeError("predict_scene: ground truth and cube dimensions differ");
  }
  std::vector<std::uint32_t> pixels;
  const auto labels = gt.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (all_pixels || labels[i] != 0) pixels.push_back(static_cast<std::uint32_t>(i));
  }
  const std::vector<std::uint16_t> pred = predict_pixels(net, cube, pixels, opt);
  io::GroundTruthMap out(gt.height(), gt.width());
  for (std::size_t i = 0; i < pixels.size(); ++i) out.labels()[pixels[i]] = pred[i];
  return out;
}

#define SEHSN_INSTANTIATE_PREDICT(T)                                                                          \
  template nn::Tensor<T> make_batch(const io::HyperspectralCube&, std::span<const std::uint32_t>, std::size_t); \
  template std::vector<std::uint16_t> predict_pixels(const Network<T>&, const io::HyperspectralCube&,         \
                                                     std::span<const std::uint32_t>, const PredictOptions&);  \
  template io::GroundTruthMap predict_scene(const Network<T>&, const io::HyperspectralCube&,                   \
                                            const io::GroundTruthMap&, bool, const PredictOptions&);          \
  template void check_parameters_finite(const Network<T>&);

SEHSN_INSTANTIATE_PREDICT(float)
SEHSN_INSTANTIATE_PREDICT(double)

}  // namespace sehsn::model
