#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sehsn/error.hpp"
#include "sehsn/hash.hpp"
#include "sehsn/nn/activation.hpp"
#include "sehsn/nn/conv.hpp"
#include "sehsn/nn/dense.hpp"
#include "sehsn/nn/depthwise.hpp"
#include "sehsn/nn/gemm.hpp"
#include "sehsn/nn/init.hpp"
#include "sehsn/nn/loss.hpp"
#include "sehsn/nn/reshape.hpp"
#include "sehsn/nn/se_block.hpp"
#include "sehsn/random.hpp"
#include "support/oracles.hpp"

using namespace sehsn;
using namespace sehsn::nn;
using oracle::random_tensor;

namespace {

// Scalar loss sum(out * R) so that d loss / d out = R.
double projected(const Tensor<double>& out, const Tensor<double>& r) { return oracle::dot(out, r); }

std::uint64_t sign_pattern(const Tensor<double>& t) {
  Fnv1a64 h;
  for (double v : t.values()) {
    const std::uint8_t bit = v > 0.0;
    h.update(std::span<const std::uint8_t>(&bit, 1));
  }
  return h.digest();
}

}  // namespace

TEST_CASE("gemm variants match a triple loop") {
  Pcg32 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.bounded(17), n = 1 + rng.bounded(17), k = 1 + rng.bounded(33);
    const Tensor<double> a = random_tensor({m, k}, rng), b = random_tensor({k, n}, rng);
    Tensor<double> at({k, m}), bt({n, k});
    transpose(m, k, a.data(), at.data());
    transpose(k, n, b.data(), bt.data());
    Tensor<double> ref({m, n});
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) ref.at(i, j) += a.at(i, p) * b.at(p, j);
    Tensor<double> c1({m, n}), c2({m, n}), c3({m, n});
    gemm(m, n, k, a.data(), b.data(), c1.data(), false);
    gemm_tn(m, n, k, at.data(), b.data(), c2.data(), false);
    gemm_nt(m, n, k, a.data(), bt.data(), c3.data(), false);
    CHECK(oracle::max_abs_diff(c1, ref) < 1e-12);
    CHECK(oracle::max_abs_diff(c2, ref) < 1e-12);
    CHECK(oracle::max_abs_diff(c3, ref) < 1e-12);
    gemm(m, n, k, a.data(), b.data(), c1.data(), true);
    for (std::size_t i = 0; i < c1.size(); ++i) CHECK(std::abs(c1[i] - 2 * ref[i]) < 1e-12);
  }
}

TEST_CASE("conv2d forward matches the nested-loop oracle on 50 random shapes") {
  Pcg32 rng(2);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t B = 1 + rng.bounded(3), C = 1 + rng.bounded(4), O = 1 + rng.bounded(5);
    const std::size_t kh = 1 + 2 * rng.bounded(3), kw = 1 + 2 * rng.bounded(3);
    const std::size_t H = kh + rng.bounded(7), W = kw + rng.bounded(7);
    Conv2d<double> layer(C, O, kh, kw);
    layer.weight = random_tensor(layer.weight.shape(), rng);
    layer.bias = random_tensor(layer.bias.shape(), rng);
    const Tensor<double> x = random_tensor({B, C, H, W}, rng);
    const Tensor<double> y = conv2d_forward(x, layer);
    const Tensor<double> ref = oracle::conv2d(x, layer.weight, layer.bias);
    REQUIRE(y.shape() == ref.shape());
    worst = std::max(worst, oracle::max_abs_diff(y, ref));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("conv3d forward matches the nested-loop oracle on 50 random shapes") {
  Pcg32 rng(3);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t B = 1 + rng.bounded(2), C = 1 + rng.bounded(3), O = 1 + rng.bounded(4);
    const Extent3 k{1 + 2 * rng.bounded(4), 1 + 2 * rng.bounded(2), 1 + 2 * rng.bounded(2)};
    const std::size_t D = k.depth + rng.bounded(6), H = k.height + rng.bounded(5), W = k.width + rng.bounded(5);
    Conv3d<double> layer(C, O, k);
    layer.weight = random_tensor(layer.weight.shape(), rng);
    layer.bias = random_tensor(layer.bias.shape(), rng);
    const Tensor<double> x = random_tensor({B, C, D, H, W}, rng);
    const Tensor<double> y = conv3d_forward(x, layer);
    const Tensor<double> ref = oracle::conv3d(x, layer.weight, layer.bias);
    REQUIRE(y.shape() == ref.shape());
    worst = std::max(worst, oracle::max_abs_diff(y, ref));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("conv trivia") {
  SUBCASE("3x3 ones on 3x3 ones is 9") {
    Conv2d<double> l(1, 1, 3, 3);
    l.weight.fill(1.0);
    const Tensor<double> y = conv2d_forward(Tensor<double>({1, 1, 3, 3}, 1.0), l);
    CHECK(y.shape() == Shape{1, 1, 1, 1});
    CHECK(y[0] == 9.0);
  }
  SUBCASE("1x1 identity kernel") {
    Conv2d<double> l(1, 1, 1, 1);
    l.weight.fill(1.0);
    Pcg32 rng(4);
    const Tensor<double> x = random_tensor({2, 1, 4, 5}, rng);
    CHECK(conv2d_forward(x, l) == x);
  }
  SUBCASE("3x3x3 ones on ones is 27") {
    Conv3d<double> l(1, 1, {3, 3, 3});
    l.weight.fill(1.0);
    CHECK(conv3d_forward(Tensor<double>({1, 1, 3, 3, 3}, 1.0), l)[0] == 27.0);
  }
  SUBCASE("1x1x1 weight 2 doubles the input") {
    Conv3d<double> l(1, 1, {1, 1, 1});
    l.weight.fill(2.0);
    Pcg32 rng(5);
    const Tensor<double> x = random_tensor({1, 1, 3, 2, 2}, rng);
    const Tensor<double> y = conv3d_forward(x, l);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == 2.0 * x[i]);
  }
  SUBCASE("linear single-output case: grad_w is the input window") {
    Pcg32 rng(6);
    Conv2d<double> l(1, 1, 3, 3);
    const Tensor<double> x = random_tensor({1, 1, 3, 3}, rng);
    const ConvGrads<double> g = conv2d_backward(x, l, Tensor<double>({1, 1, 1, 1}, 1.0));
    CHECK(g.weight.values()[4] == x[4]);
    CHECK(std::equal(g.weight.values().begin(), g.weight.values().end(), x.values().begin()));
    CHECK(g.bias[0] == 1.0);

    Conv3d<double> l3(1, 1, {3, 3, 3});
    const Tensor<double> x3 = random_tensor({1, 1, 3, 3, 3}, rng);
    const ConvGrads<double> g3 = conv3d_backward(x3, l3, Tensor<double>({1, 1, 1, 1, 1}, 1.0));
    CHECK(std::equal(g3.weight.values().begin(), g3.weight.values().end(), x3.values().begin()));
  }
  SUBCASE("channel mismatch") {
    Conv2d<double> l(2, 1, 3, 3);
    CHECK_THROWS_AS(conv2d_forward(Tensor<double>({1, 3, 3, 3}), l), ShapeError);
    Conv3d<double> l3(1, 1, {3, 3, 3});
    CHECK_THROWS_AS(conv3d_forward(Tensor<double>({1, 1, 2, 3, 3}), l3), ShapeError);
  }
}

TEST_CASE("conv backwards agree with finite differences") {
  Pcg32 rng(7);
  SUBCASE("conv2d") {
    Conv2d<double> l(3, 4, 3, 1);
    l.weight = random_tensor(l.weight.shape(), rng);
    l.bias = random_tensor(l.bias.shape(), rng);
    Tensor<double> x = random_tensor({2, 3, 6, 5}, rng);
    const Tensor<double> r = random_tensor(conv2d_forward(x, l).shape(), rng);
    const ConvGrads<double> g = conv2d_backward(x, l, r);
    auto loss = [&] { return projected(conv2d_forward(x, l), r); };
    CHECK(oracle::finite_difference(x, g.input, loss, 24, 1).worst <= 1e-4);
    CHECK(oracle::finite_difference(l.weight, g.weight, loss, 24, 2).worst <= 1e-4);
    CHECK(oracle::finite_difference(l.bias, g.bias, loss, 24, 3).worst <= 1e-4);
  }
  SUBCASE("conv3d") {
    Conv3d<double> l(2, 3, {3, 1, 3});
    l.weight = random_tensor(l.weight.shape(), rng);
    l.bias = random_tensor(l.bias.shape(), rng);
    Tensor<double> x = random_tensor({2, 2, 5, 4, 5}, rng);
    const Tensor<double> r = random_tensor(conv3d_forward(x, l).shape(), rng);
    const ConvGrads<double> g = conv3d_backward(x, l, r);
    auto loss = [&] { return projected(conv3d_forward(x, l), r); };
    CHECK(oracle::finite_difference(x, g.input, loss, 24, 1).worst <= 1e-4);
    CHECK(oracle::finite_difference(l.weight, g.weight, loss, 24, 2).worst <= 1e-4);
    CHECK(oracle::finite_difference(l.bias, g.bias, loss, 24, 3).worst <= 1e-4);
  }
  SUBCASE("depthwise separable, padded and valid") {
    for (std::size_t pad : {0u, 1u}) {
      DepthwiseSeparableConv2d<double> l(3, 5, 3, pad);
      l.depthwise = random_tensor(l.depthwise.shape(), rng);
      l.pointwise.weight = random_tensor(l.pointwise.weight.shape(), rng);
      l.pointwise.bias = random_tensor(l.pointwise.bias.shape(), rng);
      Tensor<double> x = random_tensor({2, 3, 5, 6}, rng);
      DepthwiseSeparableCache<double> cache;
      const Tensor<double> y = depthwise_separable_forward(x, l, &cache);
      const Tensor<double> r = random_tensor(y.shape(), rng);
      const auto g = depthwise_separable_backward(cache, l, r);
      auto loss = [&] { return projected(depthwise_separable_forward(x, l), r); };
      CHECK(oracle::finite_difference(x, g.input, loss, 24, 1).worst <= 1e-4);
      CHECK(oracle::finite_difference(l.depthwise, g.depthwise, loss, 24, 2).worst <= 1e-4);
      CHECK(oracle::finite_difference(l.pointwise.weight, g.pointwise_weight, loss, 24, 3).worst <= 1e-4);
      CHECK(oracle::finite_difference(l.pointwise.bias, g.pointwise_bias, loss, 24, 4).worst <= 1e-4);
    }
  }
}

TEST_CASE("depthwise separable trivia") {
  SUBCASE("identity kernels give the input back") {
    DepthwiseSeparableConv2d<double> l(2, 2, 3, 1);
    l.depthwise.zero();
    l.depthwise.at(0, 1, 1) = 1.0;
    l.depthwise.at(1, 1, 1) = 1.0;
    l.pointwise.weight.at(0, 0, 0, 0) = 1.0;
    l.pointwise.weight.at(1, 1, 0, 0) = 1.0;
    Pcg32 rng(8);
    const Tensor<double> x = random_tensor({1, 2, 4, 4}, rng);
    CHECK(oracle::max_abs_diff(depthwise_separable_forward(x, l), x) == 0.0);
  }
  SUBCASE("parameter count C*k^2 + C*C' + C'") {
    CHECK(DepthwiseSeparableConv2d<double>(64, 128, 3, 0).parameter_count() == 64 * 9 + 64 * 128 + 128);
  }
  SUBCASE("depthwise stage matches a per-channel loop") {
    Pcg32 rng(9);
    const Tensor<double> x = random_tensor({2, 3, 5, 4}, rng), k = random_tensor({3, 3, 3}, rng);
    const Tensor<double> y = depthwise_conv2d_forward(x, k);
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < 3; ++i)
          for (std::size_t j = 0; j < 2; ++j) {
            double s = 0;
            for (std::size_t u = 0; u < 3; ++u)
              for (std::size_t v = 0; v < 3; ++v) s += k.at(c, u, v) * x.at(b, c, i + u, j + v);
            CHECK(std::abs(y.at(b, c, i, j) - s) < 1e-12);
          }
  }
}

TEST_CASE("reshape helpers") {
  SUBCASE("merge order is n-major") {
    Tensor<double> t({1, 2, 3, 1, 1});
    std::iota(t.values().begin(), t.values().end(), 0.0);
    const Tensor<double> m = merge_channels(t);
    CHECK(m.shape() == Shape{1, 6, 1, 1});
    for (std::size_t n = 0; n < 2; ++n)
      for (std::size_t c = 0; c < 3; ++c) CHECK(m.at(0, n * 3 + c, 0, 0) == t.at(0, n, c, 0, 0));
    CHECK(split_channels(m, 2) == t);
  }
  SUBCASE("merge keeps the element sum") {
    Pcg32 rng(10);
    const Tensor<double> t = random_tensor({2, 3, 4, 2, 2}, rng);
    const Tensor<double> m = merge_channels(t);
    double a = 0, b = 0;
    for (double v : t.values()) a += v;
    for (double v : m.values()) b += v;
    CHECK(a == b);
  }
  SUBCASE("pad and crop are adjoint to their backwards") {
    Pcg32 rng(11);
    const Tensor<double> x = random_tensor({2, 3, 4, 5}, rng);
    CHECK(unpad_spatial(pad_spatial(x, 2, 1), 2, 1) == x);
    const Tensor<double> v = random_tensor({1, 2, 7, 5, 5}, rng);
    const Tensor<double> c = center_crop(v, 3, 3, 1);
    CHECK(c.at(0, 1, 0, 0, 0) == v.at(0, 1, 2, 1, 2));
    const Tensor<double> g = random_tensor(c.shape(), rng);
    // <crop(v), g> = <v, crop_backward(g)>
    CHECK(std::abs(oracle::dot(c, g) - oracle::dot(v, center_crop_backward(g, v.shape()))) < 1e-12);
  }
  SUBCASE("concat and split") {
    Pcg32 rng(12);
    const Tensor<double> a = random_tensor({2, 1, 3, 2, 2}, rng), b = random_tensor({2, 4, 3, 2, 2}, rng);
    const Tensor<double>* parts[] = {&a, &b};
    const Tensor<double> cat = concat_channels<double>(parts);
    CHECK(cat.dim(1) == 5);
    CHECK(cat.at(1, 3, 2, 1, 0) == b.at(1, 2, 2, 1, 0));
    const std::size_t counts[] = {1, 4};
    const auto back = split_concat(cat, counts);
    CHECK(back[0] == a);
    CHECK(back[1] == b);
  }
}

TEST_CASE("SE block") {
  Pcg32 rng(13);
  SUBCASE("zero weights gate every channel by one half") {
    SeBlock<double> se(4, 2);
    const Tensor<double> x = random_tensor({2, 4, 3, 3}, rng);
    const Tensor<double> y = se_forward(x, se);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i] / 2);
  }
  SUBCASE("squeeze of a per-channel constant is that constant") {
    SeBlock<double> se(3, 1);
    Tensor<double> x({1, 3, 2, 5});
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < 10; ++i) x[c * 10 + i] = 0.25 - 1.5 * static_cast<double>(c);
    SeCache<double> cache;
    se_forward(x, se, &cache);
    for (std::size_t c = 0; c < 3; ++c) CHECK(cache.squeeze[c] == 0.25 - 1.5 * static_cast<double>(c));
  }
  SUBCASE("forward against a per-element oracle") {
    SeBlock<double> se(6, 3);
    init_parameters(se, 3);
    se.fc1.bias = random_tensor({2}, rng);
    se.fc2.bias = random_tensor({6}, rng);
    const Tensor<double> x = random_tensor({2, 6, 3, 4}, rng);
    const Tensor<double> y = se_forward(x, se);
    for (std::size_t b = 0; b < 2; ++b) {
      double s[6] = {};
      for (std::size_t c = 0; c < 6; ++c)
        for (std::size_t i = 0; i < 12; ++i) s[c] += x[(b * 6 + c) * 12 + i] / 12.0;
      double h[2];
      for (std::size_t j = 0; j < 2; ++j) {
        h[j] = se.fc1.bias[j];
        for (std::size_t c = 0; c < 6; ++c) h[j] += se.fc1.weight.at(j, c) * s[c];
        h[j] = std::max(0.0, h[j]);
      }
      for (std::size_t c = 0; c < 6; ++c) {
        double z = se.fc2.bias[c];
        for (std::size_t j = 0; j < 2; ++j) z += se.fc2.weight.at(c, j) * h[j];
        const double e = 1.0 / (1.0 + std::exp(-z));
        for (std::size_t i = 0; i < 12; ++i) {
          const std::size_t k = (b * 6 + c) * 12 + i;
          CHECK(std::abs(y[k] - x[k] * e) <= 1e-12);
        }
      }
    }
  }
  SUBCASE("zero upstream gradient gives zero gradients") {
    SeBlock<double> se(4, 2);
    init_parameters(se, 1);
    SeCache<double> cache;
    const Tensor<double> x = random_tensor({1, 4, 2, 2}, rng);
    se_forward(x, se, &cache);
    const SeGrads<double> g = se_backward(cache, se, Tensor<double>(x.shape()));
    for (const Tensor<double>* t : {&g.input, &g.fc1.weight, &g.fc1.bias, &g.fc2.weight, &g.fc2.bias})
      for (double v : t->values()) CHECK(v == 0.0);
  }
  SUBCASE("H=W=C=1 closed form: dy/dx = e + x e (1-e) w2 w1 [w1 x + b1 > 0]") {
    SeBlock<double> se(1, 1);
    se.fc1.weight[0] = 0.7;
    se.fc1.bias[0] = 0.2;
    se.fc2.weight[0] = -1.3;
    se.fc2.bias[0] = 0.4;
    const double x = 0.9;
    SeCache<double> cache;
    const Tensor<double> y = se_forward(Tensor<double>({1, 1, 1, 1}, x), se, &cache);
    const double h = 0.7 * x + 0.2;
    const double e = 1.0 / (1.0 + std::exp(-(-1.3 * h + 0.4)));
    CHECK(y[0] == doctest::Approx(x * e).epsilon(1e-15));
    const SeGrads<double> g = se_backward(cache, se, Tensor<double>({1, 1, 1, 1}, 1.0));
    CHECK(g.input[0] == doctest::Approx(e + x * e * (1 - e) * -1.3 * 0.7).epsilon(1e-14));
    CHECK(g.fc2.weight[0] == doctest::Approx(x * e * (1 - e) * h).epsilon(1e-14));
    CHECK(g.fc1.weight[0] == doctest::Approx(x * e * (1 - e) * -1.3 * x).epsilon(1e-14));
  }
  SUBCASE("backward against finite differences, both branches") {
    SeBlock<double> se(8, 2);
    init_parameters(se, 5);
    se.fc1.bias = random_tensor({4}, rng, 0.1, 0.5);
    Tensor<double> x = random_tensor({3, 8, 3, 3}, rng);
    SeCache<double> cache;
    const Tensor<double> y = se_forward(x, se, &cache);
    const Tensor<double> r = random_tensor(y.shape(), rng);
    const SeGrads<double> g = se_backward(cache, se, r);
    SeCache<double> probe;
    auto loss = [&] { return projected(se_forward(x, se, &probe), r); };
    auto pattern = [&] { return sign_pattern(probe.hidden); };
    CHECK(oracle::finite_difference(x, g.input, loss, 30, 1, pattern).worst <= 1e-4);
    CHECK(oracle::finite_difference(se.fc1.weight, g.fc1.weight, loss, 30, 2, pattern).worst <= 1e-4);
    CHECK(oracle::finite_difference(se.fc1.bias, g.fc1.bias, loss, 30, 3, pattern).worst <= 1e-4);
    CHECK(oracle::finite_difference(se.fc2.weight, g.fc2.weight, loss, 30, 4, pattern).worst <= 1e-4);
    CHECK(oracle::finite_difference(se.fc2.bias, g.fc2.bias, loss, 30, 5, pattern).worst <= 1e-4);
  }
  SUBCASE("unit gate is the identity") {
    SeBlock<double> se(4, 2);
    init_parameters(se, 9);
    const Tensor<double> x = random_tensor({2, 4, 3, 3}, rng);
    CHECK(se_forward<double>(x, se, nullptr, true) == x);
  }
  SUBCASE("reduction must divide the channels") { CHECK_THROWS_AS(SeBlock<double>(6, 4), ConfigError); }
}

TEST_CASE("activations") {
  SUBCASE("relu") {
    const Tensor<double> y = relu_forward(Tensor<double>({3}, {-1.0, 0.0, 2.0}));
    CHECK(y.values()[0] == 0.0);
    CHECK(y.values()[1] == 0.0);
    CHECK(y.values()[2] == 2.0);
    const Tensor<double> g = relu_backward(y, Tensor<double>({3}, {5.0, 5.0, 5.0}));
    CHECK(g.values()[0] == 0.0);
    CHECK(g.values()[2] == 5.0);
  }
  SUBCASE("sigmoid is stable at the extremes") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(-1000.0) == 0.0);
    CHECK(sigmoid(1000.0) == 1.0);
    CHECK(sigmoid(3.0) == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))).epsilon(1e-15));
  }
  Pcg32 rng(14);
  const Tensor<double> x = random_tensor({50, 40}, rng);
  SUBCASE("dropout rate 0 and inference are the identity") {
    CHECK(dropout_forward(x, 0.0, 1, true) == x);
    CHECK(dropout_forward(x, 0.5, 1, false) == x);
  }
  SUBCASE("dropout keeps 1 - rate of the units, scaled, reproducibly") {
    Tensor<double> mask;
    const Tensor<double> ones({200, 500}, 1.0);
    const Tensor<double> y = dropout_forward(ones, 0.4, 77, true, &mask);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0) {
        ++kept;
        CHECK(y[i] == doctest::Approx(1.0 / 0.6).epsilon(1e-15));
      }
    }
    const double frac = static_cast<double>(kept) / static_cast<double>(y.size());
    CHECK(std::abs(frac - 0.6) < 0.02 * 0.6);
    CHECK(dropout_forward(ones, 0.4, 77, true) == y);
    CHECK(dropout_forward(ones, 0.4, 78, true) != y);
  }
  SUBCASE("dropout backward with the mask fixed") {
    Tensor<double> xin = x;
    Tensor<double> mask;
    dropout_forward(xin, 0.3, 5, true, &mask);
    const Tensor<double> r = random_tensor(x.shape(), rng);
    const Tensor<double> g = dropout_backward(mask, r);
    auto loss = [&] { return projected(dropout_forward(xin, 0.3, 5, true), r); };
    CHECK(oracle::finite_difference(xin, g, loss, 30, 1).worst <= 1e-4);
  }
  SUBCASE("invalid rates") {
    CHECK_THROWS_AS(dropout_forward(x, 1.0, 1, true), ConfigError);
    CHECK_THROWS_AS(dropout_forward(x, -0.1, 1, true), ConfigError);
  }
}

TEST_CASE("dense layer") {
  Pcg32 rng(15);
  Dense<double> l(7, 4);
  l.weight = random_tensor(l.weight.shape(), rng);
  l.bias = random_tensor(l.bias.shape(), rng);
  Tensor<double> x = random_tensor({3, 7}, rng);
  const Tensor<double> y = dense_forward(x, l);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t o = 0; o < 4; ++o) {
      double s = l.bias[o];
      for (std::size_t i = 0; i < 7; ++i) s += l.weight.at(o, i) * x.at(b, i);
      CHECK(std::abs(y.at(b, o) - s) < 1e-12);
    }
  const Tensor<double> r = random_tensor(y.shape(), rng);
  const DenseGrads<double> g = dense_backward(x, l, r);
  auto loss = [&] { return projected(dense_forward(x, l), r); };
  CHECK(oracle::finite_difference(x, g.input, loss, 21, 1).worst <= 1e-4);
  CHECK(oracle::finite_difference(l.weight, g.weight, loss, 28, 2).worst <= 1e-4);
  CHECK(oracle::finite_difference(l.bias, g.bias, loss, 4, 3).worst <= 1e-4);
}

TEST_CASE("softmax cross-entropy") {
  SUBCASE("uniform logits cost ln K") {
    const std::size_t t[] = {0, 3};
    const LossResult<double> r = softmax_cross_entropy(Tensor<double>({2, 5}, 0.3), t);
    CHECK(r.loss == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  }
  Pcg32 rng(16);
  Tensor<double> z = random_tensor({4, 6}, rng, -3, 3);
  const std::size_t t[] = {1, 0, 5, 2};
  SUBCASE("shift invariance") {
    Tensor<double> shifted = z;
    for (auto& v : shifted.values()) v += 123.0;
    const auto a = softmax_cross_entropy(z, t), b = softmax_cross_entropy(shifted, t);
    CHECK(std::abs(a.loss - b.loss) <= 1e-12);
    CHECK(oracle::max_abs_diff(a.grad_logits, b.grad_logits) <= 1e-12);
  }
  SUBCASE("gradient") {
    const auto r = softmax_cross_entropy(z, t);
    auto loss = [&] { return softmax_cross_entropy(z, t).loss; };
    CHECK(oracle::finite_difference(z, r.grad_logits, loss, 24, 1).worst <= 1e-6);
  }
  SUBCASE("softmax rows sum to one") {
    const Tensor<double> p = softmax(z);
    for (std::size_t b = 0; b < 4; ++b) {
      double s = 0;
      for (std::size_t k = 0; k < 6; ++k) s += p.at(b, k);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  SUBCASE("target out of range") {
    const std::size_t bad[] = {1, 0, 6, 2};
    CHECK_THROWS_AS(softmax_cross_entropy(z, bad), DataError);
  }
}

TEST_CASE("initialization") {
  Conv3d<double> a(2, 3, {3, 3, 3}), b(2, 3, {3, 3, 3}), c(2, 3, {3, 3, 3});
  init_parameters(a, 42);
  init_parameters(b, 42);
  init_parameters(c, 43);
  CHECK(a.weight == b.weight);
  CHECK(a.weight != c.weight);
  const double bound = std::sqrt(6.0 / (2 * 27));
  for (double w : a.weight.values()) CHECK(std::abs(w) <= bound);
  for (double v : a.bias.values()) CHECK(v == 0.0);
}
