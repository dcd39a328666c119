#include "sehsn/selfcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

#include "sehsn/error.hpp"
#include "sehsn/metrics/confusion.hpp"
#include "sehsn/model/network.hpp"
#include "sehsn/nn/activation.hpp"
#include "sehsn/nn/conv.hpp"
#include "sehsn/nn/dense.hpp"
#include "sehsn/nn/depthwise.hpp"
#include "sehsn/nn/gradcheck.hpp"
#include "sehsn/nn/loss.hpp"
#include "sehsn/nn/reshape.hpp"
#include "sehsn/nn/se_block.hpp"
#include "sehsn/prep/pca.hpp"
#include "sehsn/random.hpp"

namespace sehsn {
namespace {

using nn::Tensor;
using Tensors = std::vector<std::pair<std::string, std::pair<Tensor<double>*, const Tensor<double>*>>>;

constexpr double kLayerTol = 1e-4;
constexpr double kModelTol = 1e-3;
constexpr std::size_t kSamples = 24;

Tensor<double> random_tensor(const nn::Shape& shape, Pcg32& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(shape);
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

void corrupt(Tensor<double>& g) {
  for (auto& v : g.values()) v *= 1.01;
}

bool faulty(const SelfCheckOptions& o, const char* layer) { return o.inject_fault && *o.inject_fault == layer; }

// Checks each (param, analytic grad) pair against central differences of
// `loss` and folds the worst error into one result.
CheckResult grad_result(const std::string& layer, const Tensors& tensors, const std::function<double()>& loss,
                        std::uint64_t seed, double tol) {
  CheckResult r;
  r.name = "gradient " + layer;
  r.tolerance = tol;
  std::uint64_t salt = 0;
  for (const auto& [name, pg] : tensors) {
    const auto res = nn::check_gradient(name, *pg.first, *pg.second, loss, kSamples, mix_seed(seed, ++salt));
    if (res.max_rel_error >= r.value) {
      r.value = res.max_rel_error;
      char buf[200];
      std::snprintf(buf, sizeof(buf), "worst %s[%zu]: analytic %.6g numeric %.6g", name.c_str(), res.worst_index,
                    res.worst_analytic, res.worst_numeric);
      r.detail = buf;
    }
  }
  r.passed = r.value <= tol;
  return r;
}

CheckResult check_conv3d(const SelfCheckOptions& o, std::uint64_t seed) {
  Pcg32 rng(seed);
  Tensor<double> x = random_tensor({2, 2, 5, 6, 6}, rng);
  nn::Conv3d<double> layer(2, 3, {3, 3, 3});
  layer.weight = random_tensor(layer.weight.shape(), rng);
  layer.bias = random_tensor(layer.bias.shape(), rng);
  const Tensor<double> r = nn::random_projection(nn::conv3d_forward(x, layer).shape(), mix_seed(seed, 1));
  auto g = nn::conv3d_backward(x, layer, r);
  if (faulty(o, "conv3d")) corrupt(g.weight);
  auto loss = [&] { return nn::project(nn::conv3d_forward(x, layer), r); };
  return grad_result("conv3d", {{"input", {&x, &g.input}}, {"weight", {&layer.weight, &g.weight}},
                                {"bias", {&layer.bias, &g.bias}}},
                     loss, seed, kLayerTol);
}

CheckResult check_conv2d(const SelfCheckOptions& o, std::uint64_t seed) {
  Pcg32 rng(seed);
  Tensor<double> x = random_tensor({2, 3, 7, 7}, rng);
  nn::Conv2d<double> layer(3, 4, 3, 3);
  layer.weight = random_tensor(layer.weight.shape(), rng);
  layer.bias = random_tensor(layer.bias.shape(), rng);
  const Tensor<double> r = nn::random_projection(nn::conv2d_forward(x, layer).shape(), mix_seed(seed, 1));
  auto g = nn::conv2d_backward(x, layer, r);
  if (faulty(o, "conv2d")) corrupt(g.weight);
  auto loss = [&] { return nn::project(nn::conv2d_forward(x, layer), r); };
  return grad_result("conv2d", {{"input", {&x, &g.input}}, {"weight", {&layer.weight, &g.weight}},
                                {"bias", {&layer.bias, &g.bias}}},
                     loss, seed, kLayerTol);
}

CheckResult check_depthwise(const SelfCheckOptions& o, std::uint64_t seed) {
  Pcg32 rng(seed);
  Tensor<double> x = random_tensor({2, 3, 6, 6}, rng);
  auto layer = nn::DepthwiseSeparableConv2d<double>::same(3, 4, 3);
  layer.depthwise = random_tensor(layer.depthwise.shape(), rng);
  layer.pointwise.weight = random_tensor(layer.pointwise.weight.shape(), rng);
  layer.pointwise.bias = random_tensor(layer.pointwise.bias.shape(), rng);
  nn::DepthwiseSeparableCache<double> cache;
  const Tensor<double> r =
      nn::random_projection(nn::depthwise_separable_forward(x, layer, &cache).shape(), mix_seed(seed, 1));
  auto g = nn::depthwise_separable_backward(cache, layer, r);
  if (faulty(o, "depthwise")) corrupt(g.depthwise);
  auto loss = [&] { return nn::project(nn::depthwise_separable_forward(x, layer), r); };
  return grad_result("depthwise-separable",
                     {{"input", {&x, &g.input}},
                      {"depthwise", {&layer.depthwise, &g.depthwise}},
                      {"pointwise.weight", {&layer.pointwise.weight, &g.pointwise_weight}},
                      {"pointwise.bias", {&layer.pointwise.bias, &g.pointwise_bias}}},
                     loss, seed, kLayerTol);
}

CheckResult check_se(const SelfCheckOptions& o, std::uint64_t seed) {
  Pcg32 rng(seed);
  Tensor<double> x = random_tensor({2, 8, 3, 3}, rng);
  nn::SeBlock<double> se(8, 2);
  se.fc1.weight = random_tensor(se.fc1.weight.shape(), rng);
  se.fc1.bias = random_tensor(se.fc1.bias.shape(), rng, -0.5, 0.5);
  se.fc2.weight = random_tensor(se.fc2.weight.shape(), rng);
  se.fc2.bias = random_tensor(se.fc2.bias.shape(), rng);
  nn::SeCache<double> cache;
  const Tensor<double> r = nn::random_projection(nn::se_forward(x, se, &cache).shape(), mix_seed(seed, 1));
  auto g = nn::se_backward(cache, se, r);
  if (faulty(o, "se")) corrupt(g.input);
  auto loss = [&] { return nn::project(nn::se_forward(x, se), r); };
  return grad_result("se", {{"input", {&x, &g.input}},
                            {"fc1.weight", {&se.fc1.weight, &g.fc1.weight}},
                            {"fc1.bias", {&se.fc1.bias, &g.fc1.bias}},
                            {"fc2.weight", {&se.fc2.weight, &g.fc2.weight}},
                            {"fc2.bias", {&se.fc2.bias, &g.fc2.bias}}},
                     loss, seed, kLayerTol);
}

CheckResult check_dense(const SelfCheckOptions& o, std::uint64_t seed) {
  Pcg32 rng(seed);
  Tensor<double> x = random_tensor({3, 7}, rng);
  nn::Dense<double> layer(7, 5);
  layer.weight = random_tensor(layer.weight.shape(), rng);
  layer.bias = random_tensor(layer.bias.shape(), rng);
  const Tensor<double> r = nn::random_projection({3, 5}, mix_seed(seed, 1));
  auto g = nn::dense_backward(x, layer, r);
  if (faulty(o, "dense")) corrupt(g.weight);
  auto loss = [&] { return nn::project(nn::dense_forward(x, layer), r); };
  return grad_result("dense", {{"input", {&x, &g.input}}, {"weight", {&layer.weight, &g.weight}},
                               {"bias", {&layer.bias, &g.bias}}},
                     loss, seed, kLayerTol);
}

CheckResult check_softmax_ce(std::uint64_t seed) {
  Pcg32 rng(seed);
  Tensor<double> logits = random_tensor({4, 6}, rng, -2.0, 2.0);
  const std::vector<std::size_t> targets = {0, 3, 5, 2};
  const auto res = nn::softmax_cross_entropy(logits, targets);
  auto loss = [&] { return nn::softmax_cross_entropy(logits, targets).loss; };
  return grad_result("softmax-cross-entropy", {{"logits", {&logits, &res.grad_logits}}}, loss, seed, 1e-6);
}

CheckResult check_dropout(std::uint64_t seed) {
  Pcg32 rng(seed);
  Tensor<double> x = random_tensor({4, 10}, rng);
  Tensor<double> mask;
  const Tensor<double> out = nn::dropout_forward(x, 0.3, mix_seed(seed, 2), true, &mask);
  const Tensor<double> r = nn::random_projection(out.shape(), mix_seed(seed, 1));
  const Tensor<double> g = nn::dropout_backward(mask, r);
  auto loss = [&] { return nn::project(nn::dropout_forward(x, 0.3, mix_seed(seed, 2), true), r); };
  return grad_result("dropout (fixed mask)", {{"input", {&x, &g}}}, loss, seed, kLayerTol);
}

CheckResult check_relu(std::uint64_t seed) {
  Pcg32 rng(seed);
  Tensor<double> x = random_tensor({4, 10}, rng);
  const Tensor<double> out = nn::relu_forward(x);
  const Tensor<double> r = nn::random_projection(out.shape(), mix_seed(seed, 1));
  const Tensor<double> g = nn::relu_backward(out, r);
  auto loss = [&] { return nn::project(nn::relu_forward(x), r); };
  return grad_result("relu", {{"input", {&x, &g}}}, loss, seed, kLayerTol);
}

CheckResult check_model(std::uint64_t seed) {
  model::ModelConfig cfg = model::tiny_config(2);
  cfg.seed = seed;
  model::Network<double> net(cfg);
  Pcg32 rng(seed);
  const Tensor<double> x = random_tensor(model::input_shape<double>(cfg, 2), rng);
  const std::vector<std::size_t> targets = {0, 1};
  net.set_dropout_context(3, 1);
  const auto res = nn::softmax_cross_entropy(net.forward(x, true), targets);
  net.backward(res.grad_logits);
  auto loss = [&] { return nn::softmax_cross_entropy(net.forward(x, true), targets).loss; };

  // 50 coordinates spread over the parameter tensors; coordinates whose
  // perturbation flips a ReLU are redrawn (see check_gradient).
  auto params = net.parameters();
  std::size_t total = 0;
  for (const auto& p : params) total += p.value->size();
  loss();
  const std::uint64_t base = net.activation_pattern();
  Pcg32 pick(mix_seed(seed, 7));
  CheckResult r;
  r.name = "gradient whole model (tiny config)";
  r.tolerance = kModelTol;
  std::size_t checked = 0, skipped = 0;
  while (checked < 50 && skipped < 1000) {
    std::size_t flat = pick.bounded(static_cast<std::uint32_t>(total));
    std::size_t t = 0;
    while (flat >= params[t].value->size()) flat -= params[t++].value->size();
    auto& p = *params[t].value;
    const double analytic = (*params[t].grad)[flat];
    const double saved = p[flat];
    p[flat] = saved + 1e-5;
    const double up = loss();
    const bool kink_up = net.activation_pattern() != base;
    p[flat] = saved - 1e-5;
    const double down = loss();
    const bool kink_down = net.activation_pattern() != base;
    p[flat] = saved;
    if (kink_up || kink_down) {
      ++skipped;
      continue;
    }
    ++checked;
    const double err = nn::relative_error(analytic, (up - down) / 2e-5);
    if (err >= r.value) {
      r.value = err;
      r.detail = "worst " + params[t].name + "[" + std::to_string(flat) + "]";
    }
  }
  if (checked < 50) r.value = std::max(r.value, 1.0);
  r.detail += " (" + std::to_string(skipped) + " kink coordinates redrawn)";
  r.passed = r.value <= kModelTol;
  return r;
}

// Dominant eigenpairs by power iteration, deflating after each one.
std::vector<double> power_eigenvalues(std::vector<double> a, std::size_t n) {
  std::vector<double> values;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> v(n, 1.0), w(n);
    v[k % n] += 0.5;
    double lambda = 0.0;
    for (int it = 0; it < 100000; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.0;
        for (std::size_t j = 0; j < n; ++j) w[i] += a[i * n + j] * v[j];
      }
      double norm = 0.0;
      for (double e : w) norm += e * e;
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      double diff = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        diff = std::max(diff, std::abs(w[i] / norm - v[i]));
        v[i] = w[i] / norm;
      }
      lambda = norm;
      if (diff < 1e-14) break;
    }
    values.push_back(lambda);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a[i * n + j] -= lambda * v[i] * v[j];
    }
  }
  return values;
}

CheckResult check_pca(std::uint64_t seed) {
  CheckResult r;
  r.name = "pca vs power iteration";
  r.tolerance = 1e-8;
  Pcg32 rng(seed);
  for (std::size_t n = 6; n <= 10; n += 2) {
    io::HyperspectralCube cube(6, 7, n);
    // Distinct per-band scales keep the spectrum well separated.
    for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
      for (std::size_t b = 0; b < n; ++b) cube.data()[p * n + b] = rng.uniform(-1.0, 1.0) * (1.0 + 0.7 * b);
    }
    const auto cov = prep::band_covariance(cube, nullptr);
    const auto eig = prep::jacobi_eigen(cov, n);
    const auto ref = power_eigenvalues(cov, n);
    for (std::size_t i = 0; i < n; ++i) {
      const double err = std::abs(eig.values[i] - ref[i]) / std::max(1.0, std::abs(ref[i]));
      if (err > r.value) {
        r.value = err;
        r.detail = std::to_string(n) + " bands, eigenvalue " + std::to_string(i);
      }
    }
  }
  r.passed = r.value <= r.tolerance;
  return r;
}

CheckResult check_metrics(std::uint64_t seed) {
  CheckResult r;
  r.name = "kappa vs marginal enumeration";
  r.tolerance = 1e-12;
  Pcg32 rng(seed);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 4;
    std::vector<std::uint64_t> cells(k * k);
    for (auto& c : cells) c = rng.bounded(20);
    cells[0] += 1;
    const metrics::ConfusionMatrix cm(k, cells);
    double n = 0.0;
    for (auto c : cells) n += static_cast<double>(c);
    double po = 0.0, pe = 0.0;
    for (std::size_t i = 0; i < k; ++i) po += static_cast<double>(cells[i * k + i]) / n;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (i != j) continue;
        double row = 0.0, col = 0.0;
        for (std::size_t m = 0; m < k; ++m) {
          row += static_cast<double>(cells[i * k + m]);
          col += static_cast<double>(cells[m * k + j]);
        }
        pe += (row / n) * (col / n);
      }
    }
    const double expect = (po - pe) / (1.0 - pe);
    r.value = std::max(r.value, std::abs(metrics::kappa(cm) - expect));
  }
  // Fixed trivia.
  const metrics::ConfusionMatrix half(2, {1, 1, 1, 1});
  const metrics::ConfusionMatrix skip(2, {3, 1, 0, 0});
  if (metrics::overall_accuracy(half) != 0.5 || metrics::kappa(half) != 0.0 || metrics::average_accuracy(skip) != 0.75) {
    r.value = 1.0;
    r.detail = "trivial matrices";
  }
  r.passed = r.value <= r.tolerance;
  return r;
}

CheckResult check_reshape(std::uint64_t seed) {
  CheckResult r;
  r.name = "reshape round-trips";
  r.tolerance = 0.0;
  Pcg32 rng(seed);
  for (int trial = 0; trial < 10; ++trial) {
    const nn::Shape s = {1 + rng.bounded(3), 1 + rng.bounded(4), 1 + rng.bounded(5), 1 + rng.bounded(4),
                         1 + rng.bounded(4)};
    const Tensor<double> x = random_tensor(s, rng);
    if (!(nn::split_channels(nn::merge_channels(x), s[1]) == x)) {
      r.value = 1.0;
      r.detail = "merge/split " + nn::shape_string(s);
    }
    if (!(nn::unpad_spatial(nn::pad_spatial(x, 1, 2), 1, 2) == x)) {
      r.value = 1.0;
      r.detail = "pad/unpad " + nn::shape_string(s);
    }
  }
  r.passed = r.value == 0.0;
  return r;
}

}  // namespace

bool SelfCheckReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string SelfCheckReport::format() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s  %-40s err %.3e (tol %.0e)", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                  c.value, c.tolerance);
    os << buf;
    if (!c.detail.empty() && (!c.passed || c.detail.find("redrawn") != std::string::npos)) os << "  " << c.detail;
    os << '\n';
  }
  const auto failed = std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; });
  os << (failed == 0 ? "selfcheck passed" : "selfcheck FAILED (" + std::to_string(failed) + " checks)") << '\n';
  return os.str();
}

SelfCheckReport run_selfcheck(const SelfCheckOptions& o) {
  static const std::vector<std::string> kFaults = {"conv2d", "conv3d", "depthwise", "se", "dense"};
  if (o.inject_fault && std::find(kFaults.begin(), kFaults.end(), *o.inject_fault) == kFaults.end()) {
    throw ConfigError("selfcheck: unknown fault target '" + *o.inject_fault + "'");
  }
  const auto start = std::chrono::steady_clock::now();
  SelfCheckReport rep;
  const std::uint64_t s = o.seed;
  rep.checks.push_back(check_conv2d(o, mix_seed(s, 1)));
  rep.checks.push_back(check_conv3d(o, mix_seed(s, 2)));
  rep.checks.push_back(check_depthwise(o, mix_seed(s, 3)));
  rep.checks.push_back(check_se(o, mix_seed(s, 4)));
  rep.checks.push_back(check_dense(o, mix_seed(s, 5)));
  rep.checks.push_back(check_softmax_ce(mix_seed(s, 6)));
  rep.checks.push_back(check_dropout(mix_seed(s, 7)));
  rep.checks.push_back(check_relu(mix_seed(s, 8)));
  rep.checks.push_back(check_model(mix_seed(s, 9)));
  rep.checks.push_back(check_pca(mix_seed(s, 10)));
  rep.checks.push_back(check_metrics(mix_seed(s, 11)));
  rep.checks.push_back(check_reshape(mix_seed(s, 12)));
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace sehsn
