#include "sehsn/io/raw.hpp"

#include <json.hpp>

#include "sehsn/error.hpp"

namespace sehsn::io {

using nlohmann::json;

RasterLayout parse_raw_sidecar(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("raw sidecar: ") + e.what());
  }
  auto dim = [&](const char* key) -> std::size_t {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() <= 0) {
      throw DataError(std::string("raw sidecar: '") + key + "' must be a positive integer");
    }
    return j[key].get<std::size_t>();
  };
  auto str = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) {
      throw DataError(std::string("raw sidecar: missing string '") + key + "'");
    }
    return j[key].get<std::string>();
  };

  RasterLayout l;
  l.lines = dim("lines");
  l.samples = dim("samples");
  l.bands = dim("bands");

  const std::string dtype = str("dtype");
  if (dtype == "f32") {
    l.type = SampleType::kF32;
  } else if (dtype == "f64") {
    l.type = SampleType::kF64;
  } else if (dtype == "u16") {
    l.type = SampleType::kU16;
  } else if (dtype == "i16") {
    l.type = SampleType::kI16;
  } else {
    throw DataError("raw sidecar: unknown element type '" + dtype + "'");
  }

  const std::string interleave = str("interleave");
  if (interleave == "bsq") {
    l.interleave = Interleave::kBsq;
  } else if (interleave == "bil") {
    l.interleave = Interleave::kBil;
  } else if (interleave == "bip") {
    l.interleave = Interleave::kBip;
  } else {
    throw DataError("raw sidecar: unknown interleave '" + interleave + "'");
  }

  const std::string order = str("byte_order");
  if (order != "le" && order != "be") throw DataError("raw sidecar: byte_order must be le or be");
  l.big_endian = order == "be";
  return l;
}

std::string format_raw_sidecar(const RasterLayout& layout) {
  const char* dtype = "f64";
  switch (layout.type) {
    case SampleType::kF32: dtype = "f32"; break;
    case SampleType::kF64: dtype = "f64"; break;
    case SampleType::kU16: dtype = "u16"; break;
    case SampleType::kI16: dtype = "i16"; break;
    case SampleType::kU8: throw DataError("raw sidecar cannot describe u8 rasters");
  }
  const char* interleave = layout.interleave == Interleave::kBsq   ? "bsq"
                           : layout.interleave == Interleave::kBil ? "bil"
                                                                   : "bip";
  json j = {{"lines", layout.lines},     {"samples", layout.samples},
            {"bands", layout.bands},     {"dtype", dtype},
            {"interleave", interleave}, {"byte_order", layout.big_endian ? "be" : "le"}};
  return j.dump(2);
}

HyperspectralCube load_raw_cube(const std::filesystem::path& data_path, const RasterLayout& layout) {
  const auto bytes = read_file_bytes(data_path);
  try {
    return decode_cube(bytes, layout);
  } catch (const DataError& e) {
    throw DataError(data_path.string() + ": " + e.what());
  }
}

void save_raw_cube(const HyperspectralCube& cube, const std::filesystem::path& data_path,
                   const RasterLayout& layout) {
  write_file_bytes(data_path, encode_cube(cube, layout));
}

GroundTruthMap load_ground_truth(const std::filesystem::path& path, std::size_t height,
                                 std::size_t width, std::optional<std::size_t> num_classes) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() != height * width * 2) {
    throw DataError(path.string() + ": ground-truth size mismatch: " + std::to_string(bytes.size()) +
                    " bytes for " + std::to_string(height) + "x" + std::to_string(width) + " u16");
  }
  std::vector<std::uint16_t> labels(height * width);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = static_cast<std::uint16_t>(std::to_integer<unsigned>(bytes[2 * i]) |
                                           (std::to_integer<unsigned>(bytes[2 * i + 1]) << 8));
    if (num_classes && labels[i] > *num_classes) {
      throw DataError(path.string() + ": label " + std::to_string(labels[i]) + " at pixel " +
                      std::to_string(i) + " exceeds class count " + std::to_string(*num_classes));
    }
  }
  return GroundTruthMap(height, width, std::move(labels));
}

void save_ground_truth(const GroundTruthMap& gt, const std::filesystem::path& path) {
  std::vector<std::byte> bytes(gt.labels().size() * 2);
  for (std::size_t i = 0; i < gt.labels().size(); ++i) {
    bytes[2 * i] = static_cast<std::byte>(gt.labels()[i] & 0xff);
    bytes[2 * i + 1] = static_cast<std::byte>(gt.labels()[i] >> 8);
  }
  write_file_bytes(path, bytes);
}

}  // namespace sehsn::io
