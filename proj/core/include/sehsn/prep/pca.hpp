#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sehsn/io/cube.hpp"

namespace sehsn::prep {

struct SymmetricEigen {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // row i = unit eigenvector for values[i]
  std::size_t sweeps = 0;
};

// Cyclic Jacobi eigendecomposition of a symmetric n x n row-major matrix.
// Stops when max |off-diagonal| < tolerance * max |diagonal|. Eigenvector
// signs are fixed so that each vector's largest-magnitude entry is positive.
SymmetricEigen jacobi_eigen(std::span<const double> matrix, std::size_t n,
                            double tolerance = 1e-12, std::size_t max_sweeps = 100);

struct PcaModel {
  std::size_t input_dim = 0;
  std::size_t k = 0;
  std::vector<double> mean;         // input_dim
  std::vector<double> components;   // k x input_dim, rows orthonormal
  std::vector<double> eigenvalues;  // k, descending
  double total_variance = 0.0;      // trace of the band covariance

  std::span<const double> component(std::size_t i) const {
    return {components.data() + i * input_dim, input_dim};
  }

  std::string to_json() const;
  static PcaModel from_json(std::string_view text);
};

// Population band covariance over every pixel of the cube.
std::vector<double> band_covariance(const io::HyperspectralCube& cube, std::vector<double>* mean_out);

PcaModel fit_pca(const io::HyperspectralCube& cube, std::size_t k);
io::HyperspectralCube apply_pca(const io::HyperspectralCube& cube, const PcaModel& model);
// componentsᵀ y + mean, per pixel.
io::HyperspectralCube reconstruct_pca(const io::HyperspectralCube& reduced, const PcaModel& model);

}  // namespace sehsn::prep
