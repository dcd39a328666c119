#include "sehsn/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sehsn/error.hpp"

namespace sehsn::nn {

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax: expected [B, K], got " + shape_string(logits.shape()));
  const std::size_t batch = logits.dim(0), k = logits.dim(1);
  Tensor<T> p(logits.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const T* row = logits.data() + b * k;
    T* out = p.data() + b * k;
    const T mx = *std::max_element(row, row + k);
    T sum{0};
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = std::exp(row[j] - mx);
      sum += out[j];
    }
    for (std::size_t j = 0; j < k; ++j) out[j] /= sum;
  }
  return p;
}

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::size_t> targets) {
  if (logits.rank() != 2 || logits.dim(0) != targets.size()) {
    throw ShapeError("softmax_cross_entropy: logits " + shape_string(logits.shape()) + " vs " +
                     std::to_string(targets.size()) + " targets");
  }
  const std::size_t batch = logits.dim(0), k = logits.dim(1);
  LossResult<T> r;
  r.grad_logits = Tensor<T>(logits.shape());
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    if (targets[b] >= k) {
      throw DataError("softmax_cross_entropy: target " + std::to_string(targets[b]) + " out of range for " +
                      std::to_string(k) + " classes");
    }
    const T* row = logits.data() + b * k;
    const T mx = *std::max_element(row, row + k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(static_cast<double>(row[j] - mx));
    const double log_sum = std::log(sum);
    total += log_sum - static_cast<double>(row[targets[b]] - mx);
    T* g = r.grad_logits.data() + b * k;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(static_cast<double>(row[j] - mx) - log_sum);
      g[j] = static_cast<T>((p - (j == targets[b] ? 1.0 : 0.0)) / static_cast<double>(batch));
    }
  }
  r.loss = total / static_cast<double>(batch);
  return r;
}

template Tensor<float> softmax(const Tensor<float>&);
template Tensor<double> softmax(const Tensor<double>&);
template LossResult<float> softmax_cross_entropy(const Tensor<float>&, std::span<const std::size_t>);
template LossResult<double> softmax_cross_entropy(const Tensor<double>&, std::span<const std::size_t>);

}  // namespace sehsn::nn
