#include "sehsn/prep/standardize.hpp"

#include <cmath>
#include <vector>

#include "sehsn/error.hpp"

namespace sehsn::prep {

io::HyperspectralCube standardize_bands(const io::HyperspectralCube& cube) {
  const std::size_t bands = cube.bands();
  const std::size_t n = cube.pixel_count();
  if (n < 2) throw DataError("standardize_bands: every band needs more than one pixel");

  std::vector<double> mean(bands, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const double* px = cube.data().data() + p * bands;
    for (std::size_t b = 0; b < bands; ++b) mean[b] += px[b];
  }
  for (auto& m : mean) m /= static_cast<double>(n);

  std::vector<double> var(bands, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const double* px = cube.data().data() + p * bands;
    for (std::size_t b = 0; b < bands; ++b) {
      const double d = px[b] - mean[b];
      var[b] += d * d;
    }
  }
  std::vector<double> inv_std(bands, 1.0);
  for (std::size_t b = 0; b < bands; ++b) {
    const double sd = std::sqrt(var[b] / static_cast<double>(n));
    if (sd > 0.0) inv_std[b] = 1.0 / sd;
  }

  io::HyperspectralCube out = cube;
  auto data = out.data();
  for (std::size_t p = 0; p < n; ++p) {
    double* px = data.data() + p * bands;
    for (std::size_t b = 0; b < bands; ++b) px[b] = (px[b] - mean[b]) * inv_std[b];
  }
  return out;
}

}  // namespace sehsn::prep
