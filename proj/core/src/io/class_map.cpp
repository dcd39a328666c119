#include "sehsn/io/class_map.hpp"

#include <cctype>
#include <string>

#include "sehsn/error.hpp"
#include "sehsn/io/envi.hpp"

namespace sehsn::io {

std::vector<std::byte> encode_class_map(const GroundTruthMap& labels, std::span<const Rgb> palette) {
  const std::string header =
      "P6\n" + std::to_string(labels.width()) + " " + std::to_string(labels.height()) + "\n255\n";
  std::vector<std::byte> out;
  out.reserve(header.size() + labels.labels().size() * 3);
  for (char ch : header) out.push_back(static_cast<std::byte>(ch));
  for (auto l : labels.labels()) {
    Rgb color;
    if (l != 0) {
      if (l >= palette.size()) {
        throw DataError("label " + std::to_string(l) + " has no palette entry (palette size " +
                        std::to_string(palette.size()) + ")");
      }
      color = palette[l];
    }
    out.push_back(static_cast<std::byte>(color.r));
    out.push_back(static_cast<std::byte>(color.g));
    out.push_back(static_cast<std::byte>(color.b));
  }
  return out;
}

void render_class_map(const GroundTruthMap& labels, std::span<const Rgb> palette,
                      const std::filesystem::path& out_path) {
  write_file_bytes(out_path, encode_class_map(labels, palette));
}

RgbImage decode_ppm(std::span<const std::byte> bytes) {
  std::size_t pos = 0;
  auto peek = [&]() -> int {
    return pos < bytes.size() ? std::to_integer<int>(bytes[pos]) : -1;
  };
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      const int ch = peek();
      if (ch == '#') {
        while (pos < bytes.size() && peek() != '\n') ++pos;
      } else if (std::isspace(ch)) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> std::size_t {
    skip_ws();
    std::size_t v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(peek())) {
      v = v * 10 + static_cast<std::size_t>(peek() - '0');
      ++pos;
      any = true;
    }
    if (!any) throw DataError("PPM: expected a number");
    return v;
  };

  if (bytes.size() < 2 || peek() != 'P' || std::to_integer<int>(bytes[1]) != '6') {
    throw DataError("PPM: not a binary P6 image");
  }
  pos = 2;
  RgbImage img;
  img.width = number();
  img.height = number();
  if (number() != 255) throw DataError("PPM: only maxval 255 is supported");
  ++pos;  // single whitespace before the raster
  if (bytes.size() - pos != img.width * img.height * 3) throw DataError("PPM: raster size mismatch");
  img.pixels.resize(img.width * img.height);
  for (auto& px : img.pixels) {
    px.r = std::to_integer<std::uint8_t>(bytes[pos++]);
    px.g = std::to_integer<std::uint8_t>(bytes[pos++]);
    px.b = std::to_integer<std::uint8_t>(bytes[pos++]);
  }
  return img;
}

GroundTruthMap labels_from_image(const RgbImage& image, std::span<const Rgb> palette) {
  GroundTruthMap out(image.height, image.width);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const Rgb& px = image.pixels[i];
    bool found = false;
    for (std::size_t l = 1; l < palette.size(); ++l) {
      if (palette[l] == px) {
        out.labels()[i] = static_cast<std::uint16_t>(l);
        found = true;
        break;
      }
    }
    if (!found) {
      if (px == Rgb{}) continue;
      throw DataError("PPM pixel " + std::to_string(i) + " has a color outside the palette");
    }
  }
  return out;
}

}  // namespace sehsn::io
