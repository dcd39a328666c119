#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "sehsn/io/cube.hpp"
#include "sehsn/io/envi.hpp"

namespace sehsn::io {

// Sidecar JSON describing a headerless raster:
//   {"lines":int,"samples":int,"bands":int,"dtype":"f32|f64|u16|i16",
//    "interleave":"bsq|bil|bip","byte_order":"le|be"}
RasterLayout parse_raw_sidecar(std::string_view json_text);
std::string format_raw_sidecar(const RasterLayout& layout);

HyperspectralCube load_raw_cube(const std::filesystem::path& data_path, const RasterLayout& layout);
void save_raw_cube(const HyperspectralCube& cube, const std::filesystem::path& data_path,
                   const RasterLayout& layout);

// Canonical ground truth: raw little-endian u16, row-major. When
// num_classes is given, labels above it are rejected.
GroundTruthMap load_ground_truth(const std::filesystem::path& path, std::size_t height,
                                 std::size_t width,
                                 std::optional<std::size_t> num_classes = std::nullopt);
void save_ground_truth(const GroundTruthMap& gt, const std::filesystem::path& path);

}  // namespace sehsn::io
