#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sehsn/io/cube.hpp"

namespace sehsn::io {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Binary PPM (P6) encoding of a label grid. Label 0 is always black;
// label l > 0 uses palette[l]. palette[0] is ignored.
std::vector<std::byte> encode_class_map(const GroundTruthMap& labels, std::span<const Rgb> palette);
void render_class_map(const GroundTruthMap& labels, std::span<const Rgb> palette,
                      const std::filesystem::path& out_path);

struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Rgb> pixels;  // row-major
};

RgbImage decode_ppm(std::span<const std::byte> bytes);

// Maps each pixel back through the palette; unknown colors are an error.
// Black maps to 0 unless some class also uses black.
GroundTruthMap labels_from_image(const RgbImage& image, std::span<const Rgb> palette);

}  // namespace sehsn::io
