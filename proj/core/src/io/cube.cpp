#include "sehsn/io/cube.hpp"

#include <algorithm>
#include <string>

#include "sehsn/error.hpp"

namespace sehsn::io {

HyperspectralCube::HyperspectralCube(std::size_t height, std::size_t width, std::size_t bands)
    : HyperspectralCube(height, width, bands, std::vector<double>(height * width * bands, 0.0)) {}

HyperspectralCube::HyperspectralCube(std::size_t height, std::size_t width, std::size_t bands,
                                     std::vector<double> data)
    : height_(height), width_(width), bands_(bands), data_(std::move(data)) {
  if (height == 0 || width == 0 || bands == 0) {
    throw DataError("cube dimensions must be >= 1");
  }
  if (data_.size() != height * width * bands) {
    throw DataError("cube data length " + std::to_string(data_.size()) +
                    " != height*width*bands " + std::to_string(height * width * bands));
  }
}

GroundTruthMap::GroundTruthMap(std::size_t height, std::size_t width)
    : GroundTruthMap(height, width, std::vector<std::uint16_t>(height * width, 0)) {}

GroundTruthMap::GroundTruthMap(std::size_t height, std::size_t width,
                               std::vector<std::uint16_t> labels)
    : height_(height), width_(width), labels_(std::move(labels)) {
  if (height == 0 || width == 0) throw DataError("ground-truth dimensions must be >= 1");
  if (labels_.size() != height * width) {
    throw DataError("ground-truth length " + std::to_string(labels_.size()) +
                    " != height*width " + std::to_string(height * width));
  }
}

std::size_t GroundTruthMap::labeled_count() const {
  return static_cast<std::size_t>(
      std::count_if(labels_.begin(), labels_.end(), [](auto l) { return l != 0; }));
}

std::uint16_t GroundTruthMap::max_label() const {
  return labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end());
}

std::vector<std::size_t> GroundTruthMap::class_totals(std::size_t num_classes) const {
  std::vector<std::size_t> totals(num_classes + 1, 0);
  for (auto l : labels_) {
    if (l > num_classes) {
      throw DataError("label " + std::to_string(l) + " exceeds class count " +
                      std::to_string(num_classes));
    }
    ++totals[l];
  }
  return totals;
}

HyperspectralCube discard_bands(const HyperspectralCube& cube,
                                std::span<const std::size_t> bands_to_discard) {
  std::vector<bool> drop(cube.bands(), false);
  for (auto b : bands_to_discard) {
    if (b >= cube.bands()) {
      throw DataError("discard index " + std::to_string(b) + " out of range for " +
                      std::to_string(cube.bands()) + " bands");
    }
    if (drop[b]) throw DataError("duplicate discard index " + std::to_string(b));
    drop[b] = true;
  }
  std::vector<std::size_t> keep;
  for (std::size_t b = 0; b < cube.bands(); ++b) {
    if (!drop[b]) keep.push_back(b);
  }
  if (keep.empty()) throw DataError("discarding every band leaves an empty cube");

  HyperspectralCube out(cube.height(), cube.width(), keep.size());
  for (std::size_t r = 0; r < cube.height(); ++r) {
    for (std::size_t c = 0; c < cube.width(); ++c) {
      auto src = cube.pixel(r, c);
      auto dst = out.pixel(r, c);
      for (std::size_t i = 0; i < keep.size(); ++i) dst[i] = src[keep[i]];
    }
  }
  return out;
}

}  // namespace sehsn::io
