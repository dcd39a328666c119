#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sehsn/io/class_map.hpp"
#include "sehsn/io/cube.hpp"
#include "sehsn/io/envi.hpp"

namespace sehsn::io {

enum class CubeFormat { kEnvi, kRaw };

// Describes one scene on disk plus its dataset metadata. Relative paths
// in the JSON file are resolved against the manifest's directory.
struct DatasetManifest {
  std::string name;
  CubeFormat format = CubeFormat::kEnvi;
  std::filesystem::path cube_path;
  std::filesystem::path header_path;  // ENVI only
  RasterLayout raw_layout;            // raw only
  std::filesystem::path ground_truth_path;
  std::vector<std::size_t> bands_to_discard;
  std::vector<std::string> class_names;
  std::vector<Rgb> palette;  // palette[0] = background
  // Informational only; recorded verbatim.
  std::string wavelength_range;
  // Optional published per-class totals used to validate ground truth.
  std::vector<std::size_t> expected_class_totals;
  std::optional<double> train_fraction;
  std::optional<double> val_fraction;

  std::size_t num_classes() const { return class_names.size(); }
};

// Throws DataError naming the offending field.
void validate_manifest(const DatasetManifest& manifest);

DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);
DatasetManifest load_manifest(const std::filesystem::path& path);

HyperspectralCube load_raw_cube(const DatasetManifest& manifest);
// Dispatches on the manifest's format tag.
HyperspectralCube load_cube(const DatasetManifest& manifest);
GroundTruthMap load_ground_truth(const DatasetManifest& manifest, std::size_t height,
                                 std::size_t width);

}  // namespace sehsn::io
