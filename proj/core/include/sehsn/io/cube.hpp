#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sehsn::io {

// Reflectance cube stored band-interleaved-by-pixel: (row, col, band) with
// band fastest. Integer sources are converted to double without scaling.
class HyperspectralCube {
 public:
  HyperspectralCube() = default;
  HyperspectralCube(std::size_t height, std::size_t width, std::size_t bands);
  HyperspectralCube(std::size_t height, std::size_t width, std::size_t bands,
                    std::vector<double> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t bands() const { return bands_; }
  std::size_t pixel_count() const { return height_ * width_; }

  double& at(std::size_t row, std::size_t col, std::size_t band) {
    return data_[(row * width_ + col) * bands_ + band];
  }
  double at(std::size_t row, std::size_t col, std::size_t band) const {
    return data_[(row * width_ + col) * bands_ + band];
  }

  std::span<double> pixel(std::size_t row, std::size_t col) {
    return {data_.data() + (row * width_ + col) * bands_, bands_};
  }
  std::span<const double> pixel(std::size_t row, std::size_t col) const {
    return {data_.data() + (row * width_ + col) * bands_, bands_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const HyperspectralCube&, const HyperspectralCube&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t bands_ = 0;
  std::vector<double> data_;
};

// Per-pixel class ids; 0 is background, 1..K are classes.
class GroundTruthMap {
 public:
  GroundTruthMap() = default;
  GroundTruthMap(std::size_t height, std::size_t width);
  GroundTruthMap(std::size_t height, std::size_t width, std::vector<std::uint16_t> labels);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }

  std::uint16_t& at(std::size_t row, std::size_t col) { return labels_[row * width_ + col]; }
  std::uint16_t at(std::size_t row, std::size_t col) const { return labels_[row * width_ + col]; }

  std::span<std::uint16_t> labels() { return labels_; }
  std::span<const std::uint16_t> labels() const { return labels_; }

  std::size_t labeled_count() const;
  std::uint16_t max_label() const;
  // Pixel count per class, index 0 = background.
  std::vector<std::size_t> class_totals(std::size_t num_classes) const;

  friend bool operator==(const GroundTruthMap&, const GroundTruthMap&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint16_t> labels_;
};

// Drops the listed bands (0-based, unique, in range); the remaining bands
// keep their order and values.
HyperspectralCube discard_bands(const HyperspectralCube& cube,
                                std::span<const std::size_t> bands_to_discard);

}  // namespace sehsn::io
