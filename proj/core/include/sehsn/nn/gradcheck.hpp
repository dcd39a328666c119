#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "sehsn/nn/tensor.hpp"

namespace sehsn::nn {

// |a - n| / max(|a|, |n|, floor). The floor keeps coordinates whose true
// gradient is ~0 from dominating on round-off alone.
double relative_error(double analytic, double numeric, double floor = 1e-6);

struct GradCheckResult {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  // Coordinates dropped because the +-step perturbation changed the
  // piecewise-linear regime (see `pattern` below).
  std::size_t skipped = 0;
};

// Central differences of `loss` w.r.t. `param` at up to `samples` distinct
// coordinates (all of them if the tensor is smaller), compared with the
// analytic gradient. `param` is perturbed in place and restored.
//
// If `pattern` is given it is called after every loss evaluation and must
// return a signature of the active ReLU set. A coordinate whose +-step
// changes the signature straddles a kink, where central differences are
// meaningless; it is skipped and another coordinate is drawn.
GradCheckResult check_gradient(const std::string& name, Tensor<double>& param, const Tensor<double>& analytic,
                               const std::function<double()>& loss, std::size_t samples, std::uint64_t seed,
                               double step = 1e-5, const std::function<std::uint64_t()>& pattern = {});

// Fixed random projection R used to turn a tensor output into a scalar
// loss sum(out * R); its gradient w.r.t. out is R itself.
Tensor<double> random_projection(const Shape& shape, std::uint64_t seed);
double project(const Tensor<double>& out, const Tensor<double>& r);

}  // namespace sehsn::nn
