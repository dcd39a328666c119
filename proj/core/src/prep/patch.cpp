#include "sehsn/prep/patch.hpp"

#include <algorithm>
#include <string>

#include "sehsn/error.hpp"

namespace sehsn::prep {

Patch extract_patch(const io::HyperspectralCube& cube, std::size_t row, std::size_t col,
                    std::size_t window) {
  if (window % 2 == 0) throw ConfigError("extract_patch: window must be odd, got " + std::to_string(window));
  if (row >= cube.height() || col >= cube.width()) {
    throw DataError("extract_patch: center (" + std::to_string(row) + "," + std::to_string(col) +
                    ") outside " + std::to_string(cube.height()) + "x" + std::to_string(cube.width()));
  }
  const std::size_t bands = cube.bands();
  const auto half = static_cast<std::ptrdiff_t>(window / 2);
  Patch patch;
  patch.window = window;
  patch.channels = bands;
  patch.data.assign(window * window * bands, 0.0);
  for (std::size_t r = 0; r < window; ++r) {
    const auto src_r = static_cast<std::ptrdiff_t>(row) + static_cast<std::ptrdiff_t>(r) - half;
    if (src_r < 0 || src_r >= static_cast<std::ptrdiff_t>(cube.height())) continue;
    for (std::size_t c = 0; c < window; ++c) {
      const auto src_c = static_cast<std::ptrdiff_t>(col) + static_cast<std::ptrdiff_t>(c) - half;
      if (src_c < 0 || src_c >= static_cast<std::ptrdiff_t>(cube.width())) continue;
      auto px = cube.pixel(static_cast<std::size_t>(src_r), static_cast<std::size_t>(src_c));
      std::copy(px.begin(), px.end(), patch.data.begin() + static_cast<std::ptrdiff_t>((r * window + c) * bands));
    }
  }
  return patch;
}

Patch extract_labeled_patch(const io::HyperspectralCube& cube, const io::GroundTruthMap& gt,
                            std::size_t row, std::size_t col, std::size_t window) {
  if (gt.height() != cube.height() || gt.width() != cube.width()) {
    throw ShapeError("extract_labeled_patch: ground truth and cube extents differ");
  }
  Patch patch = extract_patch(cube, row, col, window);
  patch.label = gt.at(row, col);
  return patch;
}

}  // namespace sehsn::prep
