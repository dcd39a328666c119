#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sehsn/io/cube.hpp"

namespace sehsn::io {

enum class Interleave { kBsq, kBil, kBip };
enum class SampleType { kU8, kI16, kU16, kF32, kF64 };

std::size_t sample_size(SampleType type);

// Everything needed to decode a flat binary raster body.
struct RasterLayout {
  std::size_t lines = 0;    // rows
  std::size_t samples = 0;  // columns
  std::size_t bands = 0;
  SampleType type = SampleType::kF32;
  Interleave interleave = Interleave::kBsq;
  bool big_endian = false;
  std::size_t header_offset = 0;

  std::size_t body_bytes() const { return lines * samples * bands * sample_size(type); }
};

HyperspectralCube decode_cube(std::span<const std::byte> bytes, const RasterLayout& layout);
std::vector<std::byte> encode_cube(const HyperspectralCube& cube, const RasterLayout& layout);

struct EnviHeader {
  RasterLayout layout;
  // Every key (lower-cased, whitespace-collapsed) with its raw value;
  // braces are stripped from multi-line values.
  std::map<std::string, std::string> fields;
};

// ENVI data-type codes: 1=u8, 2=i16, 4=f32, 5=f64, 12=u16.
SampleType sample_type_from_envi_code(int code);
int envi_code(SampleType type);

EnviHeader parse_envi_header(std::string_view text);
std::string format_envi_header(const RasterLayout& layout);

HyperspectralCube load_envi_cube(const std::filesystem::path& header_path,
                                 const std::filesystem::path& data_path);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace sehsn::io
