#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sehsn/io/cube.hpp"
#include "sehsn/model/network.hpp"
#include "sehsn/nn/tensor.hpp"

namespace sehsn::model {

// Patches around the given pixels (row-major indices) as the network's
// [B, 1, bands, window, window] input; out-of-image positions are zero.
template <typename T>
nn::Tensor<T> make_batch(const io::HyperspectralCube& cube, std::span<const std::uint32_t> pixels,
                         std::size_t window);

struct PredictOptions {
  std::size_t batch_size = 128;
  // Batches are sharded over this many threads; the output does not
  // depend on the count.
  std::size_t threads = 1;
};

// 1-based class ids, one per pixel.
template <typename T>
std::vector<std::uint16_t> predict_pixels(const Network<T>& net, const io::HyperspectralCube& cube,
                                          std::span<const std::uint32_t> pixels, const PredictOptions& opt = {});

// Classifies every labeled pixel of gt (or every pixel when all_pixels);
// the rest stays 0.
template <typename T>
io::GroundTruthMap predict_scene(const Network<T>& net, const io::HyperspectralCube& cube,
                                 const io::GroundTruthMap& gt, bool all_pixels, const PredictOptions& opt = {});

// Throws NumericalError naming the first non-finite parameter tensor.
template <typename T>
void check_parameters_finite(const Network<T>& net);

}  // namespace sehsn::model
