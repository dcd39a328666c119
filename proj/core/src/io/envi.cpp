#include "sehsn/io/envi.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sehsn/error.hpp"

namespace sehsn::io {
namespace {

std::string lower_trim(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

long long parse_int(const std::string& key, const std::string& value) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw DataError("ENVI header: key '" + key + "' has non-integer value '" + value + "'");
  }
  return v;
}

template <typename Raw>
double read_sample(const std::byte* p, bool swap) {
  Raw raw;
  std::memcpy(&raw, p, sizeof(Raw));
  if (swap) {
    auto bytes = std::bit_cast<std::array<std::byte, sizeof(Raw)>>(raw);
    std::reverse(bytes.begin(), bytes.end());
    raw = std::bit_cast<Raw>(bytes);
  }
  return static_cast<double>(raw);
}

template <typename Raw>
void write_sample(std::byte* p, double value, bool swap) {
  Raw raw = static_cast<Raw>(value);
  auto bytes = std::bit_cast<std::array<std::byte, sizeof(Raw)>>(raw);
  if (swap) std::reverse(bytes.begin(), bytes.end());
  std::memcpy(p, bytes.data(), sizeof(Raw));
}

// Position of (row, col, band) in the flat body, in samples.
std::size_t body_index(const RasterLayout& l, std::size_t r, std::size_t c, std::size_t b) {
  switch (l.interleave) {
    case Interleave::kBsq: return (b * l.lines + r) * l.samples + c;
    case Interleave::kBil: return (r * l.bands + b) * l.samples + c;
    case Interleave::kBip: return (r * l.samples + c) * l.bands + b;
  }
  return 0;
}

bool needs_swap(const RasterLayout& l) {
  return l.big_endian != (std::endian::native == std::endian::big);
}

}  // namespace

std::size_t sample_size(SampleType type) {
  switch (type) {
    case SampleType::kU8: return 1;
    case SampleType::kI16:
    case SampleType::kU16: return 2;
    case SampleType::kF32: return 4;
    case SampleType::kF64: return 8;
  }
  return 0;
}

SampleType sample_type_from_envi_code(int code) {
  switch (code) {
    case 1: return SampleType::kU8;
    case 2: return SampleType::kI16;
    case 4: return SampleType::kF32;
    case 5: return SampleType::kF64;
    case 12: return SampleType::kU16;
    default: throw DataError("unsupported ENVI data type code " + std::to_string(code));
  }
}

int envi_code(SampleType type) {
  switch (type) {
    case SampleType::kU8: return 1;
    case SampleType::kI16: return 2;
    case SampleType::kF32: return 4;
    case SampleType::kF64: return 5;
    case SampleType::kU16: return 12;
  }
  return 0;
}

HyperspectralCube decode_cube(std::span<const std::byte> bytes, const RasterLayout& layout) {
  if (layout.lines == 0 || layout.samples == 0 || layout.bands == 0) {
    throw DataError("raster dimensions must be >= 1");
  }
  const std::size_t expected = layout.header_offset + layout.body_bytes();
  if (bytes.size() != expected) {
    throw DataError("raster size mismatch: file has " + std::to_string(bytes.size()) +
                    " bytes, declared dimensions need " + std::to_string(expected));
  }
  const std::byte* body = bytes.data() + layout.header_offset;
  const std::size_t width = sample_size(layout.type);
  const bool swap = needs_swap(layout);

  HyperspectralCube cube(layout.lines, layout.samples, layout.bands);
  for (std::size_t r = 0; r < layout.lines; ++r) {
    for (std::size_t c = 0; c < layout.samples; ++c) {
      for (std::size_t b = 0; b < layout.bands; ++b) {
        const std::byte* p = body + body_index(layout, r, c, b) * width;
        double v = 0.0;
        switch (layout.type) {
          case SampleType::kU8: v = read_sample<std::uint8_t>(p, false); break;
          case SampleType::kI16: v = read_sample<std::int16_t>(p, swap); break;
          case SampleType::kU16: v = read_sample<std::uint16_t>(p, swap); break;
          case SampleType::kF32: v = read_sample<float>(p, swap); break;
          case SampleType::kF64: v = read_sample<double>(p, swap); break;
        }
        cube.at(r, c, b) = v;
      }
    }
  }
  return cube;
}

std::vector<std::byte> encode_cube(const HyperspectralCube& cube, const RasterLayout& layout) {
  if (layout.lines != cube.height() || layout.samples != cube.width() ||
      layout.bands != cube.bands()) {
    throw DataError("encode_cube: layout dimensions do not match the cube");
  }
  std::vector<std::byte> out(layout.header_offset + layout.body_bytes(), std::byte{0});
  std::byte* body = out.data() + layout.header_offset;
  const std::size_t width = sample_size(layout.type);
  const bool swap = needs_swap(layout);
  for (std::size_t r = 0; r < layout.lines; ++r) {
    for (std::size_t c = 0; c < layout.samples; ++c) {
      for (std::size_t b = 0; b < layout.bands; ++b) {
        std::byte* p = body + body_index(layout, r, c, b) * width;
        const double v = cube.at(r, c, b);
        switch (layout.type) {
          case SampleType::kU8: write_sample<std::uint8_t>(p, v, false); break;
          case SampleType::kI16: write_sample<std::int16_t>(p, v, swap); break;
          case SampleType::kU16: write_sample<std::uint16_t>(p, v, swap); break;
          case SampleType::kF32: write_sample<float>(p, v, swap); break;
          case SampleType::kF64: write_sample<double>(p, v, swap); break;
        }
      }
    }
  }
  return out;
}

EnviHeader parse_envi_header(std::string_view text) {
  EnviHeader header;
  std::istringstream in{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      if (lower_trim(line) != "envi") throw DataError("ENVI header must start with 'ENVI'");
      continue;
    }
    if (trim(line).empty() || trim(line).front() == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = lower_trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos && std::getline(in, line)) {
        value += "\n" + line;
      }
      const auto close = value.find('}');
      if (close == std::string::npos) throw DataError("ENVI header: unterminated '{' for key '" + key + "'");
      value = trim(std::string_view(value).substr(1, close - 1));
    }
    header.fields[key] = value;
  }

  auto require = [&](const std::string& key) -> const std::string& {
    auto it = header.fields.find(key);
    if (it == header.fields.end()) throw DataError("ENVI header: missing key '" + key + "'");
    return it->second;
  };
  auto positive = [&](const std::string& key) {
    const long long v = parse_int(key, require(key));
    if (v <= 0) throw DataError("ENVI header: key '" + key + "' must be positive");
    return static_cast<std::size_t>(v);
  };

  RasterLayout& l = header.layout;
  l.samples = positive("samples");
  l.lines = positive("lines");
  l.bands = positive("bands");
  l.type = sample_type_from_envi_code(static_cast<int>(parse_int("data type", require("data type"))));

  const std::string interleave = lower_trim(require("interleave"));
  if (interleave == "bsq") {
    l.interleave = Interleave::kBsq;
  } else if (interleave == "bil") {
    l.interleave = Interleave::kBil;
  } else if (interleave == "bip") {
    l.interleave = Interleave::kBip;
  } else {
    throw DataError("ENVI header: unknown interleave '" + interleave + "'");
  }

  const long long order = parse_int("byte order", require("byte order"));
  if (order != 0 && order != 1) throw DataError("ENVI header: byte order must be 0 or 1");
  l.big_endian = order == 1;

  if (auto it = header.fields.find("header offset"); it != header.fields.end()) {
    const long long off = parse_int("header offset", it->second);
    if (off < 0) throw DataError("ENVI header: negative header offset");
    l.header_offset = static_cast<std::size_t>(off);
  }
  return header;
}

std::string format_envi_header(const RasterLayout& layout) {
  const char* interleave = layout.interleave == Interleave::kBsq   ? "bsq"
                           : layout.interleave == Interleave::kBil ? "bil"
                                                                   : "bip";
  std::ostringstream out;
  out << "ENVI\n"
      << "samples = " << layout.samples << "\n"
      << "lines = " << layout.lines << "\n"
      << "bands = " << layout.bands << "\n"
      << "header offset = " << layout.header_offset << "\n"
      << "data type = " << envi_code(layout.type) << "\n"
      << "interleave = " << interleave << "\n"
      << "byte order = " << (layout.big_endian ? 1 : 0) << "\n";
  return out.str();
}

HyperspectralCube load_envi_cube(const std::filesystem::path& header_path,
                                 const std::filesystem::path& data_path) {
  const EnviHeader header = parse_envi_header(read_text_file(header_path));
  const auto bytes = read_file_bytes(data_path);
  try {
    return decode_cube(bytes, header.layout);
  } catch (const DataError& e) {
    throw DataError(data_path.string() + ": " + e.what());
  }
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<std::byte> bytes(size);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw DataError("short read on " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed on " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  write_file_bytes(path, std::as_bytes(std::span(text.data(), text.size())));
}

}  // namespace sehsn::io
