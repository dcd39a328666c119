#include "sehsn/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "sehsn/error.hpp"
#include "sehsn/hash.hpp"
#include "sehsn/nn/loss.hpp"
#include "sehsn/random.hpp"

namespace sehsn::train {

void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.optimizer.learning_rate >= 0.0) || !std::isfinite(cfg.optimizer.learning_rate)) {
    throw ConfigError("train config: learning_rate must be finite and >= 0");
  }
  if (cfg.batch_size == 0) throw ConfigError("train config: batch_size must be >= 1");
  if (cfg.max_epochs == 0) throw ConfigError("train config: max_epochs must be >= 1");
  if (cfg.repeats == 0) throw ConfigError("train config: repeats must be >= 1");
  if (cfg.patience == 0) throw ConfigError("train config: patience must be >= 1");
  if (cfg.stop_on_perfect_train && !cfg.track_train_accuracy) {
    throw ConfigError("train config: stop_on_perfect_train needs track_train_accuracy");
  }
}

template <typename T>
metrics::ConfusionMatrix confusion_for(const model::Network<T>& net, const io::HyperspectralCube& cube,
                                       const io::GroundTruthMap& gt, std::span<const std::uint32_t> pixels,
                                       const model::PredictOptions& opt) {
  const std::vector<std::uint16_t> pred = model::predict_pixels(net, cube, pixels, opt);
  metrics::ConfusionMatrix cm(net.config().num_classes);
  for (std::size_t i = 0; i < pixels.size(); ++i) cm.accumulate(gt.labels()[pixels[i]], pred[i]);
  return cm;
}

template <typename T>
metrics::MetricsReport evaluate(const model::Network<T>& net, const io::HyperspectralCube& cube,
                                const io::GroundTruthMap& gt, const prep::SplitAssignment& split, prep::Role role,
                                const model::PredictOptions& opt) {
  const std::vector<std::uint32_t> pixels = split.indices(role);
  if (pixels.empty()) {
    throw DataError(std::string("evaluate: the split has no ") + prep::role_code(role) + " pixels");
  }
  return metrics::make_report(confusion_for(net, cube, gt, pixels, opt));
}

template <typename T>
TrainReport train_network(model::Network<T>& net, const io::HyperspectralCube& cube, const io::GroundTruthMap& gt,
                          const prep::SplitAssignment& split, const TrainConfig& cfg, const TrainHooks& hooks) {
  validate_train_config(cfg);
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::uint32_t> order = split.indices(prep::Role::kTrain);
  const std::vector<std::uint32_t> val = split.indices(prep::Role::kValidation);
  if (order.empty()) throw DataError("train: the split has no training pixels");
  if (val.empty()) throw DataError("train: the split has no validation pixels");
  const std::vector<std::uint32_t> train_pixels = order;
  const std::size_t window = net.config().window;
  const model::PredictOptions popt{128, cfg.eval_threads};

  TrainReport report;
  report.split_seed = split.seed;
  report.init_seed = net.config().seed;
  report.train_seed = cfg.seed;

  Optimizer<T> opt(cfg.optimizer);
  Pcg32 rng(mix_seed(cfg.seed, fnv1a64("shuffle")));
  std::vector<nn::Tensor<T>> best;
  auto snapshot = [&] {
    best.clear();
    for (const auto& p : net.parameters()) best.push_back(*p.value);
  };
  snapshot();
  bool have_best = false;
  std::vector<std::size_t> targets;
  report.stop_reason = "max_epochs";

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle(std::span<std::uint32_t>(order), rng);
    double loss_sum = 0.0;
    for (std::size_t lo = 0, b = 0; lo < order.size(); lo += cfg.batch_size, ++b) {
      const std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
      const std::span<const std::uint32_t> pix(order.data() + lo, hi - lo);
      targets.clear();
      for (std::uint32_t p : pix) targets.push_back(gt.labels()[p] - 1u);
      net.set_dropout_context(epoch, b);
      const nn::Tensor<T> logits = net.forward(model::make_batch<T>(cube, pix, window), true);
      const nn::LossResult<T> lr = nn::softmax_cross_entropy(logits, targets);
      if (!std::isfinite(lr.loss)) {
        throw NumericalError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(b + 1));
      }
      net.backward(lr.grad_logits);
      auto params = net.parameters();
      for (const auto& p : params) {
        for (T g : p.grad->values()) {
          if (!std::isfinite(static_cast<double>(g))) {
            throw NumericalError("training diverged: non-finite gradient for '" + p.name + "' at epoch " +
                                 std::to_string(epoch) + ", batch " + std::to_string(b + 1));
          }
        }
      }
      opt.step(params);
      loss_sum += lr.loss * static_cast<double>(hi - lo);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(order.size());
    rec.val_oa = metrics::overall_accuracy(confusion_for(net, cube, gt, val, popt));
    if (cfg.track_train_accuracy) {
      rec.train_accuracy = metrics::overall_accuracy(confusion_for(net, cube, gt, train_pixels, popt));
    }
    report.epochs.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);

    if (!have_best || rec.val_oa > report.best_val_oa) {
      have_best = true;
      report.best_val_oa = rec.val_oa;
      report.selected_epoch = epoch;
      snapshot();
    }
    if (cfg.stop_on_perfect_train && rec.train_accuracy && *rec.train_accuracy == 1.0) {
      report.stop_reason = "perfect_train_accuracy";
      break;
    }
    if (epoch - report.selected_epoch >= cfg.patience) {
      report.stop_reason = "patience";
      break;
    }
  }

  auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) *params[i].value = best[i];
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

#define SEHSN_INSTANTIATE_TRAIN(T)                                                                            \
  template metrics::ConfusionMatrix confusion_for(const model::Network<T>&, const io::HyperspectralCube&,     \
                                                  const io::GroundTruthMap&, std::span<const std::uint32_t>,  \
                                                  const model::PredictOptions&);                              \
  template metrics::MetricsReport evaluate(const model::Network<T>&, const io::HyperspectralCube&,            \
                                           const io::GroundTruthMap&, const prep::SplitAssignment&,           \
                                           prep::Role, const model::PredictOptions&);                         \
  template TrainReport train_network(model::Network<T>&, const io::HyperspectralCube&, const io::GroundTruthMap&, \
                                     const prep::SplitAssignment&, const TrainConfig&, const TrainHooks&);

SEHSN_INSTANTIATE_TRAIN(float)
SEHSN_INSTANTIATE_TRAIN(double)

}  // namespace sehsn::train
