#include "sehsn/io/manifest.hpp"

#include <json.hpp>
#include <set>

#include "sehsn/error.hpp"
#include "sehsn/io/raw.hpp"

namespace sehsn::io {

using nlohmann::json;

void validate_manifest(const DatasetManifest& m) {
  if (m.name.empty()) throw DataError("manifest: empty name");
  if (m.class_names.empty()) throw DataError("manifest: class_names is empty");
  if (m.palette.size() != m.class_names.size() + 1) {
    throw DataError("manifest '" + m.name + "': palette has " + std::to_string(m.palette.size()) +
                    " entries, expected class count + 1 = " +
                    std::to_string(m.class_names.size() + 1));
  }
  std::set<std::size_t> seen;
  for (auto b : m.bands_to_discard) {
    if (!seen.insert(b).second) {
      throw DataError("manifest '" + m.name + "': duplicate discard band " + std::to_string(b));
    }
  }
  if (!m.expected_class_totals.empty() && m.expected_class_totals.size() != m.class_names.size()) {
    throw DataError("manifest '" + m.name + "': expected_class_totals length != class count");
  }
}

DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  DatasetManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    const json& cube = j.at("cube");
    const std::string format = cube.at("format").get<std::string>();
    if (format == "envi") {
      m.format = CubeFormat::kEnvi;
      m.header_path = resolve(cube.at("header").get<std::string>());
      m.cube_path = resolve(cube.at("data").get<std::string>());
    } else if (format == "raw") {
      m.format = CubeFormat::kRaw;
      m.cube_path = resolve(cube.at("data").get<std::string>());
      const json& sidecar = cube.at("sidecar");
      m.raw_layout = sidecar.is_string() ? parse_raw_sidecar(read_text_file(resolve(sidecar.get<std::string>())))
                                         : parse_raw_sidecar(sidecar.dump());
    } else {
      throw DataError("manifest: unknown cube format '" + format + "'");
    }
    m.ground_truth_path = resolve(j.at("ground_truth").at("path").get<std::string>());
    m.bands_to_discard = j.value("bands_to_discard", std::vector<std::size_t>{});
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& c : j.at("palette")) {
      const auto rgb = c.get<std::vector<int>>();
      if (rgb.size() != 3) throw DataError("manifest: palette entries must be [r,g,b]");
      for (int v : rgb) {
        if (v < 0 || v > 255) throw DataError("manifest: palette component out of 0..255");
      }
      m.palette.push_back({static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                           static_cast<std::uint8_t>(rgb[2])});
    }
    m.wavelength_range = j.value("wavelength_range", std::string{});
    m.expected_class_totals = j.value("expected_class_totals", std::vector<std::size_t>{});
    if (j.contains("train_fraction")) m.train_fraction = j["train_fraction"].get<double>();
    if (j.contains("val_fraction")) m.val_fraction = j["val_fraction"].get<double>();
  } catch (const json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
  validate_manifest(m);
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_text_file(path), path.parent_path());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

HyperspectralCube load_raw_cube(const DatasetManifest& manifest) {
  if (manifest.format != CubeFormat::kRaw) {
    throw DataError("manifest '" + manifest.name + "' does not describe a raw cube");
  }
  return load_raw_cube(manifest.cube_path, manifest.raw_layout);
}

HyperspectralCube load_cube(const DatasetManifest& manifest) {
  if (manifest.format == CubeFormat::kRaw) return load_raw_cube(manifest);
  return load_envi_cube(manifest.header_path, manifest.cube_path);
}

GroundTruthMap load_ground_truth(const DatasetManifest& manifest, std::size_t height,
                                 std::size_t width) {
  return load_ground_truth(manifest.ground_truth_path, height, width, manifest.num_classes());
}

}  // namespace sehsn::io
