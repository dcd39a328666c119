#include "sehsn/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sehsn/error.hpp"
#include "sehsn/random.hpp"

namespace sehsn::nn {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult check_gradient(const std::string& name, Tensor<double>& param, const Tensor<double>& analytic,
                               const std::function<double()>& loss, std::size_t samples, std::uint64_t seed,
                               double step, const std::function<std::uint64_t()>& pattern) {
  analytic.expect_shape(param.shape(), "check_gradient");
  std::vector<std::size_t> idx(param.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Pcg32 rng(seed);
  shuffle(std::span<std::size_t>(idx), rng);
  std::uint64_t base = 0;
  if (pattern) {
    loss();
    base = pattern();
  }
  GradCheckResult r;
  r.name = name;
  for (std::size_t i : idx) {
    if (r.checked >= samples) break;
    const double saved = param[i];
    param[i] = saved + step;
    const double up = loss();
    const bool kink_up = pattern && pattern() != base;
    param[i] = saved - step;
    const double down = loss();
    const bool kink_down = pattern && pattern() != base;
    param[i] = saved;
    if (kink_up || kink_down) {
      ++r.skipped;
      continue;
    }
    const double numeric = (up - down) / (2.0 * step);
    const double err = relative_error(analytic[i], numeric);
    if (err > r.max_rel_error || r.checked == 0) {
      r.max_rel_error = err;
      r.worst_index = i;
      r.worst_analytic = analytic[i];
      r.worst_numeric = numeric;
    }
    ++r.checked;
  }
  return r;
}

Tensor<double> random_projection(const Shape& shape, std::uint64_t seed) {
  Tensor<double> r(shape);
  Pcg32 rng(seed);
  for (auto& v : r.values()) v = rng.uniform(-1.0, 1.0);
  return r;
}

double project(const Tensor<double>& out, const Tensor<double>& r) {
  out.expect_shape(r.shape(), "project");
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += out[i] * r[i];
  return acc;
}

}  // namespace sehsn::nn
