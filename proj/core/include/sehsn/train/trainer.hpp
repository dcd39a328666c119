#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sehsn/io/cube.hpp"
#include "sehsn/metrics/confusion.hpp"
#include "sehsn/model/network.hpp"
#include "sehsn/model/predict.hpp"
#include "sehsn/prep/split.hpp"
#include "sehsn/train/optimizer.hpp"

namespace sehsn::train {

struct TrainConfig {
  OptimizerConfig optimizer;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 150;
  // Stop after this many epochs without a new best validation OA.
  std::size_t patience = 30;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  // Draw a fresh split for every repeat (seed base+i) instead of reusing
  // the base split.
  bool resplit_per_repeat = true;
  // Also measure training-set accuracy (inference mode) every epoch, and
  // optionally stop once it reaches 1.
  bool track_train_accuracy = false;
  bool stop_on_perfect_train = false;
  // Scene inference threads for validation/test passes.
  std::size_t eval_threads = 1;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate_train_config(const TrainConfig& cfg);
std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(std::string_view text);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean training loss over the epoch
  double val_oa = 0.0;
  std::optional<double> train_accuracy;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t selected_epoch = 0;  // 1-based, max validation OA
  double best_val_oa = 0.0;
  std::string stop_reason;
  double wall_time_seconds = 0.0;
  std::uint64_t split_seed = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;
  std::optional<metrics::MetricsReport> test;

  // Timing is the only field that differs between identical runs; it can
  // be left out for byte comparisons.
  std::string to_json(bool include_timing = true) const;
  // epoch,loss,val_oa[,train_acc]
  std::string curves_csv() const;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
};

// Builds the confusion matrix over exactly the pixels of `role`.
template <typename T>
metrics::ConfusionMatrix confusion_for(const model::Network<T>& net, const io::HyperspectralCube& cube,
                                       const io::GroundTruthMap& gt, std::span<const std::uint32_t> pixels,
                                       const model::PredictOptions& opt = {});

template <typename T>
metrics::MetricsReport evaluate(const model::Network<T>& net, const io::HyperspectralCube& cube,
                                const io::GroundTruthMap& gt, const prep::SplitAssignment& split, prep::Role role,
                                const model::PredictOptions& opt = {});

// Mini-batch training with per-epoch validation; on return the network
// holds the parameters of the best validation epoch. `cube` is the
// preprocessed (PCA) scene. Throws NumericalError naming epoch and batch
// if the loss stops being finite.
template <typename T>
TrainReport train_network(model::Network<T>& net, const io::HyperspectralCube& cube, const io::GroundTruthMap& gt,
                          const prep::SplitAssignment& split, const TrainConfig& cfg, const TrainHooks& hooks = {});

}  // namespace sehsn::train
