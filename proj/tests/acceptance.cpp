// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance                 all eight criteria
//   acceptance --criteria 1,6  a subset
//
// Real scenes are read from $SEHSN_DATA_DIR (indian_pines.f32 and
// indian_pines_gt.u16 in the layout of manifests/indian_pines.json).
// Without it, criteria 4 and 7 run on a synthetic scene with the Indian
// Pines extents, band count and class totals, and say so; criterion 5 has
// no stand-in and fails as not run. Exit code: 0 all passed, 77 the only
// failures were missing data, 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "app.hpp"
#include "sehsn/io/cube.hpp"
#include "sehsn/io/manifest.hpp"
#include "sehsn/metrics/confusion.hpp"
#include "sehsn/model/config.hpp"
#include "sehsn/model/network.hpp"
#include "sehsn/nn/activation.hpp"
#include "sehsn/nn/conv.hpp"
#include "sehsn/nn/dense.hpp"
#include "sehsn/nn/depthwise.hpp"
#include "sehsn/nn/init.hpp"
#include "sehsn/nn/loss.hpp"
#include "sehsn/nn/se_block.hpp"
#include "sehsn/prep/pca.hpp"
#include "sehsn/prep/split.hpp"
#include "sehsn/prep/standardize.hpp"
#include "sehsn/random.hpp"
#include "sehsn/train/trainer.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/tables.hpp"
#include "support/tempdir.hpp"

namespace fs = std::filesystem;
using namespace sehsn;
using nlohmann::json;
using nn::Tensor;
using oracle::random_tensor;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
  bool data_missing = false;
};

// ---------------------------------------------------------------- data

const char* kIpStem = "indian_pines";

std::optional<fs::path> data_dir() {
  const char* d = std::getenv("SEHSN_DATA_DIR");
  if (!d || !*d) return std::nullopt;
  const fs::path p(d);
  if (!fs::exists(p / "indian_pines.f32") || !fs::exists(p / "indian_pines_gt.u16")) return std::nullopt;
  return p;
}

// The shipped manifest, pointed at the files under $SEHSN_DATA_DIR.
fs::path real_ip_manifest(const fs::path& data, const fs::path& dir) {
  std::ifstream in(fs::path(SEHSN_SOURCE_DIR) / "manifests" / "indian_pines.json");
  json m = json::parse(in);
  m["cube"]["data"] = fs::absolute(data / "indian_pines.f32").string();
  m["ground_truth"]["path"] = fs::absolute(data / "indian_pines_gt.u16").string();
  const fs::path out = dir / "indian_pines.json";
  write_text(out, m.dump(2));
  return out;
}

// Synthetic stand-in with the shipped manifest's extents and discard list
// and the class totals of the scene.
fs::path surrogate_ip_manifest(const fs::path& dir) {
  std::ifstream in(fs::path(SEHSN_SOURCE_DIR) / "manifests" / "indian_pines.json");
  const json m = json::parse(in);
  const auto& sc = m["cube"]["sidecar"];
  const auto gt = synthetic::ground_truth(sc["lines"], sc["samples"], tables::totals(tables::kIndianPines));
  const auto cube = synthetic::cube(gt, sc["bands"], 16, 2024, 0.05, 1.0);
  return synthetic::write_dataset(dir, kIpStem, cube, gt, 16, m["bands_to_discard"].get<std::vector<std::size_t>>(),
                                  0.05, 0.05);
}

struct Scene {
  io::HyperspectralCube cube;  // discarded, standardized, PCA
  io::GroundTruthMap gt;
};

Scene preprocess(const fs::path& manifest, std::size_t pca_k) {
  const io::DatasetManifest m = io::load_manifest(manifest);
  const io::HyperspectralCube raw = io::load_cube(m);
  io::GroundTruthMap gt = io::load_ground_truth(m, raw.height(), raw.width());
  const io::HyperspectralCube s = prep::standardize_bands(io::discard_bands(raw, m.bands_to_discard));
  return {prep::apply_pca(s, prep::fit_pca(s, pca_k)), std::move(gt)};
}

// ------------------------------------------------------------ criterion 1

constexpr std::size_t kCoords = 20;
constexpr double kLayerTol = 1e-4;
constexpr double kModelTol = 1e-3;

struct GradTally {
  double worst = 0.0;
  std::size_t tensors = 0;
  std::vector<std::string> short_tensors;  // fewer than kCoords checked
  std::vector<std::string> over;

  void add(const std::string& name, Tensor<double>& param, const Tensor<double>& analytic,
           const std::function<double()>& loss, double tol, std::uint64_t seed,
           const std::function<std::uint64_t()>& pattern = {}) {
    const auto r = oracle::finite_difference(param, analytic, loss, kCoords + 4, seed, pattern);
    ++tensors;
    worst = std::max(worst, r.worst);
    if (r.checked < std::min(kCoords, param.size())) short_tensors.push_back(name);
    if (!(r.worst <= tol)) over.push_back(name + " (" + fmt("%.2e", r.worst) + ")");
  }
};

double projected(const Tensor<double>& out, const Tensor<double>& r) { return oracle::dot(out, r); }

std::uint64_t sign_pattern(const Tensor<double>& t) {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : t.values()) h = (h ^ static_cast<std::uint64_t>(v > 0.0)) * 1099511628211ull;
  return h;
}

Outcome criterion_gradients() {
  const auto t0 = Clock::now();
  GradTally t;
  Pcg32 rng(101);
  {
    nn::Conv2d<double> l(2, 20, 3, 3);
    l.weight = random_tensor(l.weight.shape(), rng);
    l.bias = random_tensor(l.bias.shape(), rng);
    Tensor<double> x = random_tensor({2, 2, 5, 6}, rng);
    const Tensor<double> r = random_tensor(nn::conv2d_forward(x, l).shape(), rng);
    const auto g = nn::conv2d_backward(x, l, r);
    auto loss = [&] { return projected(nn::conv2d_forward(x, l), r); };
    t.add("conv2d.input", x, g.input, loss, kLayerTol, 1);
    t.add("conv2d.weight", l.weight, g.weight, loss, kLayerTol, 2);
    t.add("conv2d.bias", l.bias, g.bias, loss, kLayerTol, 3);
  }
  {
    nn::Conv3d<double> l(2, 20, {3, 3, 3});
    l.weight = random_tensor(l.weight.shape(), rng);
    l.bias = random_tensor(l.bias.shape(), rng);
    Tensor<double> x = random_tensor({1, 2, 5, 4, 5}, rng);
    const Tensor<double> r = random_tensor(nn::conv3d_forward(x, l).shape(), rng);
    const auto g = nn::conv3d_backward(x, l, r);
    auto loss = [&] { return projected(nn::conv3d_forward(x, l), r); };
    t.add("conv3d.input", x, g.input, loss, kLayerTol, 4);
    t.add("conv3d.weight", l.weight, g.weight, loss, kLayerTol, 5);
    t.add("conv3d.bias", l.bias, g.bias, loss, kLayerTol, 6);
  }
  {
    nn::DepthwiseSeparableConv2d<double> l(20, 20, 3, 1);
    l.depthwise = random_tensor(l.depthwise.shape(), rng);
    l.pointwise.weight = random_tensor(l.pointwise.weight.shape(), rng);
    l.pointwise.bias = random_tensor(l.pointwise.bias.shape(), rng);
    Tensor<double> x = random_tensor({1, 20, 4, 5}, rng);
    nn::DepthwiseSeparableCache<double> cache;
    const Tensor<double> r = random_tensor(nn::depthwise_separable_forward(x, l, &cache).shape(), rng);
    const auto g = nn::depthwise_separable_backward(cache, l, r);
    auto loss = [&] { return projected(nn::depthwise_separable_forward(x, l), r); };
    t.add("separable.input", x, g.input, loss, kLayerTol, 7);
    t.add("separable.depthwise", l.depthwise, g.depthwise, loss, kLayerTol, 8);
    t.add("separable.pointwise.weight", l.pointwise.weight, g.pointwise_weight, loss, kLayerTol, 9);
    t.add("separable.pointwise.bias", l.pointwise.bias, g.pointwise_bias, loss, kLayerTol, 10);
  }
  {
    nn::SeBlock<double> se(40, 2);
    nn::init_parameters(se, 11);
    se.fc1.bias = random_tensor(se.fc1.bias.shape(), rng, 0.1, 0.5);
    se.fc2.bias = random_tensor(se.fc2.bias.shape(), rng);
    Tensor<double> x = random_tensor({2, 40, 3, 3}, rng);
    nn::SeCache<double> cache;
    const Tensor<double> r = random_tensor(nn::se_forward(x, se, &cache).shape(), rng);
    const auto g = nn::se_backward(cache, se, r);
    nn::SeCache<double> probe;
    auto loss = [&] { return projected(nn::se_forward(x, se, &probe), r); };
    auto pattern = [&] { return sign_pattern(probe.hidden); };
    t.add("se.input", x, g.input, loss, kLayerTol, 12, pattern);
    t.add("se.fc1.weight", se.fc1.weight, g.fc1.weight, loss, kLayerTol, 13, pattern);
    t.add("se.fc1.bias", se.fc1.bias, g.fc1.bias, loss, kLayerTol, 14, pattern);
    t.add("se.fc2.weight", se.fc2.weight, g.fc2.weight, loss, kLayerTol, 15, pattern);
    t.add("se.fc2.bias", se.fc2.bias, g.fc2.bias, loss, kLayerTol, 16, pattern);
  }
  {
    nn::Dense<double> l(25, 20);
    l.weight = random_tensor(l.weight.shape(), rng);
    l.bias = random_tensor(l.bias.shape(), rng);
    Tensor<double> x = random_tensor({2, 25}, rng);
    const Tensor<double> r = random_tensor({2, 20}, rng);
    const auto g = nn::dense_backward(x, l, r);
    auto loss = [&] { return projected(nn::dense_forward(x, l), r); };
    t.add("dense.input", x, g.input, loss, kLayerTol, 17);
    t.add("dense.weight", l.weight, g.weight, loss, kLayerTol, 18);
    t.add("dense.bias", l.bias, g.bias, loss, kLayerTol, 19);
  }
  {
    Tensor<double> z = random_tensor({4, 6}, rng, -3, 3);
    const std::size_t targets[] = {1, 0, 5, 2};
    const auto res = nn::softmax_cross_entropy(z, targets);
    auto loss = [&] { return nn::softmax_cross_entropy(z, targets).loss; };
    t.add("softmax_ce.logits", z, res.grad_logits, loss, kLayerTol, 20);
  }
  {
    Tensor<double> x = random_tensor({5, 8}, rng);
    Tensor<double> mask;
    nn::dropout_forward(x, 0.3, 21, true, &mask);
    const Tensor<double> r = random_tensor(x.shape(), rng);
    const Tensor<double> g = nn::dropout_backward(mask, r);
    auto loss = [&] { return projected(nn::dropout_forward(x, 0.3, 21, true), r); };
    t.add("dropout.input", x, g, loss, kLayerTol, 22);
  }
  const double layer_worst = t.worst;
  const std::size_t layer_tensors = t.tensors;

  // Whole model, tiny config, with and without SE.
  GradTally m;
  for (const bool se : {true, false}) {
    model::ModelConfig cfg = model::tiny_config(3);
    cfg.use_se = se;
    model::Network<double> net(cfg);
    net.set_dropout_context(1, 1);
    Pcg32 xr(23);
    const Tensor<double> x = random_tensor(model::input_shape<double>(cfg, 3), xr);
    const std::size_t targets[] = {0, 2, 1};
    auto loss = [&] { return nn::softmax_cross_entropy(net.forward(x, true), targets).loss; };
    net.backward(nn::softmax_cross_entropy(net.forward(x, true), targets).grad_logits);
    std::vector<Tensor<double>> grads;
    for (const auto& p : net.parameters()) grads.push_back(*p.grad);
    auto params = net.parameters();
    for (std::size_t i = 0; i < params.size(); ++i)
      m.add((se ? "se:" : "plain:") + params[i].name, *params[i].value, grads[i], loss, kModelTol, 200 + i,
            [&] { return net.activation_pattern(); });
  }

  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = t.over.empty() && t.short_tensors.empty() && m.over.empty() && m.short_tensors.empty() && secs <= 120.0;
  std::ostringstream d;
  d << layer_tensors << " layer tensors worst " << fmt("%.2e", layer_worst) << " (<= 1e-4), " << m.tensors
    << " model tensors worst " << fmt("%.2e", m.worst) << " (<= 1e-3), " << fmt("%.1f", secs) << " s (<= 120)";
  for (const auto& s : t.over) d << "; over: " << s;
  for (const auto& s : m.over) d << "; over: " << s;
  for (const auto& s : t.short_tensors) d << "; too few coordinates: " << s;
  for (const auto& s : m.short_tensors) d << "; too few coordinates: " << s;
  o.detail = d.str();
  return o;
}

// ------------------------------------------------------------ criterion 2

Outcome criterion_oracles() {
  Pcg32 rng(202);
  double conv2 = 0, conv3 = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t B = 1 + rng.bounded(3), C = 1 + rng.bounded(4), O = 1 + rng.bounded(5);
    const std::size_t kh = 1 + 2 * rng.bounded(3), kw = 1 + 2 * rng.bounded(3);
    nn::Conv2d<double> l(C, O, kh, kw);
    l.weight = random_tensor(l.weight.shape(), rng);
    l.bias = random_tensor(l.bias.shape(), rng);
    const Tensor<double> x = random_tensor({B, C, kh + rng.bounded(7), kw + rng.bounded(7)}, rng);
    conv2 = std::max(conv2, oracle::max_abs_diff(nn::conv2d_forward(x, l), oracle::conv2d(x, l.weight, l.bias)));
  }
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t B = 1 + rng.bounded(2), C = 1 + rng.bounded(3), O = 1 + rng.bounded(4);
    const nn::Extent3 k{1 + 2 * rng.bounded(4), 1 + 2 * rng.bounded(2), 1 + 2 * rng.bounded(2)};
    nn::Conv3d<double> l(C, O, k);
    l.weight = random_tensor(l.weight.shape(), rng);
    l.bias = random_tensor(l.bias.shape(), rng);
    const Tensor<double> x =
        random_tensor({B, C, k.depth + rng.bounded(6), k.height + rng.bounded(5), k.width + rng.bounded(5)}, rng);
    conv3 = std::max(conv3, oracle::max_abs_diff(nn::conv3d_forward(x, l), oracle::conv3d(x, l.weight, l.bias)));
  }
  double pca = 0;
  for (std::size_t d = 6; d <= 12; ++d) {
    const std::size_t n = 60 + 10 * d;
    const std::vector<double> x = synthetic::anisotropic_data(n, d, rng);
    const prep::PcaModel model = prep::fit_pca(io::HyperspectralCube(n, 1, d, x), d);
    const auto pairs = oracle::power_iteration(oracle::covariance(x, n, d), d, d);
    for (std::size_t i = 0; i < d; ++i) {
      pca = std::max(pca, std::abs(model.eigenvalues[i] - pairs[i].value));
      for (std::size_t c = 0; c < d; ++c) pca = std::max(pca, std::abs(model.components[i * d + c] - pairs[i].vector[c]));
    }
  }
  double kap = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.bounded(5);
    std::vector<std::uint64_t> cells(k * k);
    for (auto& c : cells) c = rng.bounded(40);
    cells[0] += 1;
    const metrics::ConfusionMatrix cm(k, cells);
    std::vector<std::vector<std::uint64_t>> rows(k, std::vector<std::uint64_t>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) rows[i][j] = cm.at(i + 1, j + 1);
    kap = std::max(kap, std::abs(metrics::kappa(cm) - oracle::kappa_by_enumeration(rows)));
  }
  Outcome o;
  o.pass = conv2 <= 1e-12 && conv3 <= 1e-12 && pca <= 1e-8 && kap <= 1e-12;
  o.detail = "conv2d " + fmt("%.1e", conv2) + ", conv3d " + fmt("%.1e", conv3) + " over 50 shapes each (<= 1e-12); PCA " +
             fmt("%.1e", pca) + " on d = 6..12 (<= 1e-8); kappa " + fmt("%.1e", kap) +
             " over 100 matrices (<= 1e-12)";
  return o;
}

// ------------------------------------------------------------ criterion 3

Outcome criterion_splits() {
  struct Expect {
    const char* name;
    const std::vector<tables::Row>* rows;
    double fraction;
    std::size_t train, val, test;
    bool per_class;
  };
  const Expect cases[] = {{"IP", &tables::kIndianPines, 0.05, 512, 512, 9225, true},
                          {"UP", &tables::kPaviaUniversity, 0.01, 427, 427, 41922, false},
                          {"SA", &tables::kSalinas, 0.01, 541, 541, 53047, false}};
  std::vector<std::string> bad;
  std::ostringstream d;
  for (const Expect& e : cases) {
    const auto totals = tables::totals(*e.rows);
    const auto gt = synthetic::ground_truth(300, 300, totals);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto split = prep::stratified_split(gt, totals.size(), e.fraction, e.fraction, seed);
      const auto counts = prep::split_class_counts(split, gt);
      std::size_t tr = 0, va = 0, te = 0;
      for (std::size_t k = 1; k < counts.size(); ++k) {
        tr += counts[k].train;
        va += counts[k].validation;
        te += counts[k].test;
        const long diff = static_cast<long>(counts[k].train) - static_cast<long>((*e.rows)[k - 1].train);
        if (e.per_class && std::abs(diff) > 1)
          bad.push_back(std::string(e.name) + " class " + std::to_string(k) + " train " +
                        std::to_string(counts[k].train));
      }
      if (tr != e.train || va != e.val || te != e.test)
        bad.push_back(std::string(e.name) + " seed " + std::to_string(seed) + " totals (" + std::to_string(tr) + ", " +
                      std::to_string(va) + ", " + std::to_string(te) + ")");
    }
    d << e.name << " (" << e.train << ", " << e.val << ", " << e.test << ") ";
  }
  std::string source = "reference class counts, seeds 0-4";
  if (const auto data = data_dir()) {
    TempDir tmp("acc3");
    const io::DatasetManifest m = io::load_manifest(real_ip_manifest(*data, tmp.path()));
    const io::RasterLayout layout = m.raw_layout;
    const auto gt = io::load_ground_truth(m, layout.lines, layout.samples);
    const auto counts = prep::split_class_counts(prep::stratified_split(gt, 16, 0.05, 0.05, 0), gt);
    std::size_t tr = 0, va = 0, te = 0;
    for (std::size_t k = 1; k < counts.size(); ++k) {
      tr += counts[k].train;
      va += counts[k].validation;
      te += counts[k].test;
    }
    if (tr != 512 || va != 512 || te != 9225) bad.push_back("IP ground truth from data");
    source += ", plus the IP ground-truth file";
  }
  Outcome o;
  o.pass = bad.empty();
  o.detail = d.str() + "from " + source;
  for (const auto& b : bad) o.detail += "; mismatch: " + b;
  return o;
}

// ------------------------------------------------------------ criterion 4

Outcome criterion_overfit() {
  const auto t0 = Clock::now();
  TempDir tmp("acc4");
  const auto data = data_dir();
  const fs::path manifest = data ? real_ip_manifest(*data, tmp.path()) : surrogate_ip_manifest(tmp.path());
  const Scene scene = preprocess(manifest, 30);

  // Eight of the larger classes, eight training pixels each, plus one
  // validation pixel per class (the trainer needs a validation set).
  const std::uint16_t chosen[8] = {2, 3, 5, 6, 8, 10, 11, 14};
  std::map<std::uint16_t, std::vector<std::uint32_t>> by_class;
  const auto& labels = scene.gt.labels();
  for (std::uint32_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Pcg32 rng(404);
  io::GroundTruthMap gt(scene.gt.height(), scene.gt.width());
  std::map<std::uint32_t, prep::Role> role;
  for (std::size_t c = 0; c < 8; ++c) {
    auto& px = by_class[chosen[c]];
    shuffle(std::span<std::uint32_t>(px), rng);
    for (std::size_t j = 0; j < 9; ++j) {
      gt.labels()[px[j]] = static_cast<std::uint16_t>(c + 1);
      role[px[j]] = j < 8 ? prep::Role::kTrain : prep::Role::kValidation;
    }
  }
  prep::SplitAssignment split;
  split.seed = 404;
  split.height = gt.height();
  split.width = gt.width();
  split.num_classes = 8;
  for (const auto& [p, r] : role) {
    split.pixels.push_back(p);
    split.roles.push_back(r);
  }

  model::ModelConfig mc = model::se_hybridsn_config(19, 30, 8);
  mc.seed = 404;
  model::Network<float> net(mc);
  train::TrainConfig tc;
  tc.batch_size = 16;
  tc.max_epochs = 200;
  tc.patience = 200;
  tc.seed = 404;
  tc.track_train_accuracy = true;
  tc.stop_on_perfect_train = true;
  const train::TrainReport rep = train::train_network(net, scene.cube, gt, split, tc);

  double best = 0;
  std::size_t reached = 0;
  for (const auto& e : rep.epochs) {
    best = std::max(best, e.train_accuracy.value_or(0.0));
    if (!reached && e.train_accuracy && *e.train_accuracy == 1.0) reached = e.epoch;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = reached > 0 && reached <= 200 && secs <= 300.0;
  o.detail = std::string(data ? "IP data" : "SURROGATE (synthetic IP-shaped scene; set SEHSN_DATA_DIR for the real one)") +
             ": 64 samples / 8 classes, " +
             (reached ? "100% training accuracy at epoch " + std::to_string(reached)
                      : "best training accuracy " + fmt("%.4f", best) + " after " +
                            std::to_string(rep.epochs.size()) + " epochs") +
             " (<= 200), " + fmt("%.1f", secs) + " s (<= 300)";
  return o;
}

// ------------------------------------------------------------ criterion 5

double mean_oa(const fs::path& out) {
  std::ifstream in(out / "train" / "aggregate_report.json");
  return json::parse(in)["oa"]["mean"].get<double>();
}

Outcome criterion_reproduction() {
  Outcome o;
  const auto data = data_dir();
  if (!data) {
    o.data_missing = true;
    o.detail = "not run: Indian Pines data not found (set SEHSN_DATA_DIR)";
    return o;
  }
  const auto t0 = Clock::now();
  const fs::path work = std::getenv("SEHSN_ACCEPTANCE_OUT") ? fs::path(std::getenv("SEHSN_ACCEPTANCE_OUT"))
                                                            : fs::temp_directory_path() / "sehsn_acceptance_5";
  fs::create_directories(work);
  const fs::path manifest = real_ip_manifest(*data, work);
  std::map<std::string, double> oa;
  for (const std::string arch : {"se_hybridsn", "hybridsn"}) {
    const fs::path cfg = work / (arch + ".toml");
    write_text(cfg, "seed = 0\nthreads = 0\n[preprocess]\ntrain_fraction = 0.05\nval_fraction = 0.05\n"
                    "[model]\narchitecture = \"" + arch + "\"\n[train]\nrepeats = 5\n");
    const fs::path out = work / arch;
    std::ostringstream sink, err;
    for (const char* cmd : {"prepare", "train"}) {
      const int rc = app::run_cli({cmd, "--config", cfg.string(), "--manifest", manifest.string(), "--out",
                                   out.string()},
                                  sink, err);
      if (rc != 0) {
        o.detail = arch + " " + cmd + " failed (exit " + std::to_string(rc) + "): " + err.str();
        return o;
      }
    }
    oa[arch] = mean_oa(out);
  }
  const double hours = seconds_since(t0) / 3600.0;
  o.pass = oa["se_hybridsn"] >= 0.91 && oa["se_hybridsn"] > oa["hybridsn"] && hours <= 3.0;
  o.detail = "5-repeat mean OA " + fmt("%.2f", 100 * oa["se_hybridsn"]) + "% (>= 91.00), baseline " +
             fmt("%.2f", 100 * oa["hybridsn"]) + "% (must be lower), " + fmt("%.2f", hours) + " h (<= 3)";
  return o;
}

// ------------------------------------------------------------ criterion 6

Outcome criterion_se_ablation() {
  const auto t0 = Clock::now();
  double worst = 0;
  std::size_t batches = 0;
  for (const model::ModelConfig& base : {model::tiny_config(4), model::se_hybridsn_config(19, 30, 16)}) {
    model::ModelConfig with = base, without = base;
    without.use_se = false;
    model::Network<double> a(with);
    const model::Network<double> b(without);
    a.set_force_unit_gates(true);
    for (std::uint64_t s = 0; s < 3; ++s) {
      Pcg32 rng(600 + s);
      const Tensor<double> x = random_tensor(model::input_shape<double>(base, 2), rng);
      worst = std::max(worst, oracle::max_abs_diff(a.predict_logits(x), b.predict_logits(x)));
      ++batches;
    }
  }
  Outcome o;
  o.pass = worst <= 1e-12;
  o.detail = "max |unit-gate SE - SE-free| " + fmt("%.1e", worst) + " over " + std::to_string(batches) +
             " batches, tiny and default configs (<= 1e-12), " + fmt("%.1f", seconds_since(t0)) + " s";
  return o;
}

// ------------------------------------------------------------ criterion 7

Outcome criterion_determinism() {
  TempDir tmp("acc7");
  const auto data = data_dir();
  const fs::path manifest = data ? real_ip_manifest(*data, tmp.path()) : surrogate_ip_manifest(tmp / "data");
  // Real data: the default network for two epochs. Surrogate: the tiny one.
  const std::string model_section =
      data ? "[model]\n"
           : "[preprocess]\nwindow = 5\npca_k = 8\n"
             "[model]\n"
             "conv3d = [ { out_channels = 2, kernel = [3, 3, 3] }, { out_channels = 2, kernel = [3, 3, 3] },\n"
             "           { out_channels = 2, kernel = [1, 3, 3] }, { out_channels = 2, kernel = [1, 3, 3] } ]\n"
             "conv2d = [ { kind = \"standard\", out_channels = 4, kernel = 3 },\n"
             "           { kind = \"separable\", out_channels = 4, kernel = 3 } ]\n"
             "same_padding_3d = true\nsame_padding_2d = true\nfc_dims = [8, 6, 16]\nse_reduction = 2\n";
  const fs::path cfg = tmp / "run.toml";
  write_text(cfg, "seed = 17\nthreads = 0\n" + model_section + "[train]\nmax_epochs = 2\npatience = 2\n");
  // "c" differs only in the seed: a control that the comparison can fail.
  for (const char* run : {"a", "b", "c"}) {
    for (const char* cmd : {"prepare", "train", "eval"}) {
      std::ostringstream sink, err;
      const int rc = app::run_cli({cmd, "--config", cfg.string(), "--manifest", manifest.string(), "--out",
                                   (tmp / run).string(), "--seed", run[0] == 'c' ? "18" : "17"},
                                  sink, err);
      if (rc != 0) return {false, std::string(cmd) + " failed (exit " + std::to_string(rc) + "): " + err.str()};
    }
  }
  const char* artifacts[] = {"prepared/split.json", "prepared/cube_pca.f64", "train/run_0/split.json",
                             "train/run_0/checkpoint.bin", "train/run_0/metrics.json", "eval/metrics.json"};
  std::vector<std::string> differ;
  for (const char* a : artifacts) {
    const auto x = read_bytes(tmp / "a" / a), y = read_bytes(tmp / "b" / a);
    if (x.empty() || x != y) differ.push_back(a);
  }
  const bool control_differs =
      read_bytes(tmp / "a" / "train/run_0/checkpoint.bin") != read_bytes(tmp / "c" / "train/run_0/checkpoint.bin");
  Outcome o;
  o.pass = differ.empty() && control_differs;
  o.detail = std::string(data ? "IP data" : "SURROGATE (synthetic IP-shaped scene, tiny network)") +
             ": prepare/train/eval twice with seed 17; " + std::to_string(std::size(artifacts)) +
             " artifacts compared byte for byte; seed 18 control " + (control_differs ? "differs" : "DOES NOT differ");
  for (const auto& d : differ) o.detail += "; differs: " + d;
  return o;
}

// ------------------------------------------------------------ criterion 8

Outcome criterion_metrics() {
  using metrics::ConfusionMatrix;
  std::vector<std::string> bad;
  auto expect = [&](const std::string& what, double got, double want) {
    if (got != want) bad.push_back(what + " = " + fmt("%.17g", got));
  };
  {
    ConfusionMatrix cm(3);
    cm.accumulate(2, 2);
    expect("one sample trace", static_cast<double>(cm.trace()), 1);
    expect("one sample total", static_cast<double>(cm.total()), 1);
  }
  {
    ConfusionMatrix cm(2);
    cm.accumulate(1, 1);
    cm.accumulate(1, 2);
    cm.accumulate(2, 2);
    if (!(cm == ConfusionMatrix(2, {1, 1, 0, 1}))) bad.push_back("stream (1,1),(1,2),(2,2)");
  }
  {
    ConfusionMatrix a(4), b(4);
    const std::pair<std::size_t, std::size_t> stream[] = {{1, 2}, {3, 3}, {4, 1}, {2, 2}, {1, 1}, {3, 4}};
    for (auto [t, p] : stream) a.accumulate(t, p);
    for (auto it = std::rbegin(stream); it != std::rend(stream); ++it) b.accumulate(it->first, it->second);
    if (!(a == b)) bad.push_back("order independence");
  }
  const ConfusionMatrix diag(3, {4, 0, 0, 0, 2, 0, 0, 0, 9}), flat(2, {1, 1, 1, 1});
  expect("OA diagonal", metrics::overall_accuracy(diag), 1.0);
  expect("OA [[1,1],[1,1]]", metrics::overall_accuracy(flat), 0.5);
  expect("AA [[2,0],[0,2]]", metrics::average_accuracy(ConfusionMatrix(2, {2, 0, 0, 2})), 1.0);
  expect("AA [[1,1],[0,2]]", metrics::average_accuracy(ConfusionMatrix(2, {1, 1, 0, 2})), 0.75);
  expect("AA [[3,1],[0,0]]", metrics::average_accuracy(ConfusionMatrix(2, {3, 1, 0, 0})), 0.75);
  expect("kappa diagonal", metrics::kappa(diag), 1.0);
  expect("kappa [[1,1],[1,1]]", metrics::kappa(flat), 0.0);
  // Perfect predictor over the IP test column.
  {
    ConfusionMatrix cm(16);
    for (std::size_t k = 0; k < 16; ++k)
      for (std::size_t i = 0; i < tables::kIndianPines[k].test; ++i) cm.accumulate(k + 1, k + 1);
    expect("perfect OA", metrics::overall_accuracy(cm), 1.0);
    expect("perfect AA", metrics::average_accuracy(cm), 1.0);
    expect("perfect kappa", metrics::kappa(cm), 1.0);
  }
  Outcome o;
  o.pass = bad.empty();
  o.detail = "15 constructed cases, exact equality";
  for (const auto& b : bad) o.detail += "; wrong: " + b;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance criteria");
  std::vector<int> which;
  app.add_option("--criteria", which, "criteria to run (default: all)")->delimiter(',')->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};
  std::sort(which.begin(), which.end());
  which.erase(std::unique(which.begin(), which.end()), which.end());

  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"gradient suite", criterion_gradients}},
      {2, {"oracle equivalence", criterion_oracles}},
      {3, {"split fidelity", criterion_splits}},
      {4, {"overfit sanity", criterion_overfit}},
      {5, {"end-to-end reproduction", criterion_reproduction}},
      {6, {"SE ablation identity", criterion_se_ablation}},
      {7, {"determinism", criterion_determinism}},
      {8, {"metrics trivia", criterion_metrics}},
  };
  bool any_fail = false, only_missing = true;
  for (int c : which) {
    const auto& [name, fn] = criteria.at(c);
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c << " " << name << ": " << o.detail << std::endl;
    if (!o.pass) {
      any_fail = true;
      only_missing = only_missing && o.data_missing;
    }
  }
  if (!any_fail) return 0;
  return only_missing ? 77 : 1;
}
