#pragma once

#include "sehsn/io/cube.hpp"

namespace sehsn::prep {

// Per-band z-score over all pixels (population std). Zero-variance bands
// come out mean-centered, i.e. all zeros.
io::HyperspectralCube standardize_bands(const io::HyperspectralCube& cube);

}  // namespace sehsn::prep
