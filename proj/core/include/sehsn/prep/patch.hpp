#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sehsn/io/cube.hpp"

namespace sehsn::prep {

// window x window neighborhood of one pixel, stored (row, col, channel).
struct Patch {
  std::size_t window = 0;
  std::size_t channels = 0;
  std::vector<double> data;
  std::uint16_t label = 0;

  double at(std::size_t r, std::size_t c, std::size_t ch) const {
    return data[(r * window + c) * channels + ch];
  }
};

// Positions outside the image are zero-filled. The label is left 0; the
// caller copies it from the ground truth.
Patch extract_patch(const io::HyperspectralCube& cube, std::size_t row, std::size_t col,
                    std::size_t window);

Patch extract_labeled_patch(const io::HyperspectralCube& cube, const io::GroundTruthMap& gt,
                            std::size_t row, std::size_t col, std::size_t window);

}  // namespace sehsn::prep
