#include "sehsn/prep/pca.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "sehsn/error.hpp"
#include "sehsn/log.hpp"

namespace sehsn::prep {

SymmetricEigen jacobi_eigen(std::span<const double> matrix, std::size_t n, double tolerance,
                            std::size_t max_sweeps) {
  if (matrix.size() != n * n) throw ShapeError("jacobi_eigen: matrix is not n x n");
  std::vector<double> a(matrix.begin(), matrix.end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  auto converged = [&] {
    double max_diag = 0.0;
    double max_off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      max_diag = std::max(max_diag, std::abs(a[i * n + i]));
      for (std::size_t j = i + 1; j < n; ++j) max_off = std::max(max_off, std::abs(a[i * n + j]));
    }
    return max_off <= tolerance * max_diag;
  };

  SymmetricEigen result;
  while (!converged()) {
    if (result.sweeps == max_sweeps) {
      throw NumericalError("jacobi_eigen: no convergence after " + std::to_string(max_sweeps) +
                           " sweeps");
    }
    ++result.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        // Rotation angle that annihilates a[p][q].
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        // Columns of v accumulate the rotations.
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });

  result.values.resize(n);
  result.vectors.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t col = order[i];
    result.values[i] = a[col * n + col];
    std::size_t arg = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (std::abs(v[k * n + col]) > std::abs(v[arg * n + col])) arg = k;
    }
    const double sign = v[arg * n + col] < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n; ++k) result.vectors[i * n + k] = sign * v[k * n + col];
  }
  return result;
}

std::vector<double> band_covariance(const io::HyperspectralCube& cube, std::vector<double>* mean_out) {
  const std::size_t bands = cube.bands();
  const std::size_t n = cube.pixel_count();
  std::vector<double> mean(bands, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const double* px = cube.data().data() + p * bands;
    for (std::size_t b = 0; b < bands; ++b) mean[b] += px[b];
  }
  for (auto& m : mean) m /= static_cast<double>(n);

  std::vector<double> cov(bands * bands, 0.0);
  std::vector<double> d(bands);
  for (std::size_t p = 0; p < n; ++p) {
    const double* px = cube.data().data() + p * bands;
    for (std::size_t b = 0; b < bands; ++b) d[b] = px[b] - mean[b];
    for (std::size_t i = 0; i < bands; ++i) {
      const double di = d[i];
      double* row = cov.data() + i * bands;
      for (std::size_t j = i; j < bands; ++j) row[j] += di * d[j];
    }
  }
  for (std::size_t i = 0; i < bands; ++i) {
    for (std::size_t j = i; j < bands; ++j) {
      cov[i * bands + j] /= static_cast<double>(n);
      cov[j * bands + i] = cov[i * bands + j];
    }
  }
  if (mean_out) *mean_out = std::move(mean);
  return cov;
}

PcaModel fit_pca(const io::HyperspectralCube& cube, std::size_t k) {
  const std::size_t bands = cube.bands();
  if (k < 1 || k > bands) {
    throw ConfigError("fit_pca: k=" + std::to_string(k) + " outside 1.." + std::to_string(bands));
  }
  if (cube.pixel_count() < bands) {
    warn("fit_pca: " + std::to_string(cube.pixel_count()) + " pixels for " + std::to_string(bands) +
         " bands; covariance is rank deficient");
  }

  PcaModel model;
  model.input_dim = bands;
  model.k = k;
  const auto cov = band_covariance(cube, &model.mean);
  for (std::size_t i = 0; i < bands; ++i) model.total_variance += cov[i * bands + i];

  const SymmetricEigen eig = jacobi_eigen(cov, bands);
  model.eigenvalues.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(k));
  // Round-off can leave tiny negative eigenvalues of a PSD matrix.
  for (auto& e : model.eigenvalues) e = std::max(e, 0.0);
  model.components.assign(eig.vectors.begin(),
                          eig.vectors.begin() + static_cast<std::ptrdiff_t>(k * bands));
  return model;
}

io::HyperspectralCube apply_pca(const io::HyperspectralCube& cube, const PcaModel& model) {
  if (cube.bands() != model.input_dim) {
    throw ShapeError("apply_pca: cube has " + std::to_string(cube.bands()) +
                     " bands, model expects " + std::to_string(model.input_dim));
  }
  const std::size_t n = cube.pixel_count();
  const std::size_t dim = model.input_dim;
  io::HyperspectralCube out(cube.height(), cube.width(), model.k);
  std::vector<double> centered(dim);
  for (std::size_t p = 0; p < n; ++p) {
    const double* px = cube.data().data() + p * dim;
    for (std::size_t b = 0; b < dim; ++b) centered[b] = px[b] - model.mean[b];
    double* y = out.data().data() + p * model.k;
    for (std::size_t i = 0; i < model.k; ++i) {
      const double* axis = model.components.data() + i * dim;
      double acc = 0.0;
      for (std::size_t b = 0; b < dim; ++b) acc += axis[b] * centered[b];
      y[i] = acc;
    }
  }
  return out;
}

io::HyperspectralCube reconstruct_pca(const io::HyperspectralCube& reduced, const PcaModel& model) {
  if (reduced.bands() != model.k) throw ShapeError("reconstruct_pca: band count != model.k");
  const std::size_t dim = model.input_dim;
  io::HyperspectralCube out(reduced.height(), reduced.width(), dim);
  for (std::size_t p = 0; p < reduced.pixel_count(); ++p) {
    const double* y = reduced.data().data() + p * model.k;
    double* x = out.data().data() + p * dim;
    for (std::size_t b = 0; b < dim; ++b) x[b] = model.mean[b];
    for (std::size_t i = 0; i < model.k; ++i) {
      const double* axis = model.components.data() + i * dim;
      for (std::size_t b = 0; b < dim; ++b) x[b] += y[i] * axis[b];
    }
  }
  return out;
}

std::string PcaModel::to_json() const {
  nlohmann::json j = {{"input_dim", input_dim}, {"k", k},
                      {"mean", mean},           {"components", components},
                      {"eigenvalues", eigenvalues}, {"total_variance", total_variance}};
  return j.dump();
}

PcaModel PcaModel::from_json(std::string_view text) {
  PcaModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.input_dim = j.at("input_dim").get<std::size_t>();
    m.k = j.at("k").get<std::size_t>();
    m.mean = j.at("mean").get<std::vector<double>>();
    m.components = j.at("components").get<std::vector<double>>();
    m.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    m.total_variance = j.value("total_variance", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("PCA model JSON: ") + e.what());
  }
  if (m.mean.size() != m.input_dim || m.components.size() != m.k * m.input_dim ||
      m.eigenvalues.size() != m.k) {
    throw DataError("PCA model JSON: inconsistent array sizes");
  }
  return m;
}

}  // namespace sehsn::prep
