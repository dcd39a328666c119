#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sehsn/io/cube.hpp"
#include "sehsn/metrics/confusion.hpp"
#include "sehsn/model/config.hpp"
#include "sehsn/train/trainer.hpp"

namespace sehsn::train {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

struct RunRecord {
  std::uint64_t seed = 0;
  TrainReport report;  // report.test holds the test metrics
};

struct RunFailure {
  std::uint64_t seed = 0;
  std::string message;
};

struct AggregateReport {
  std::vector<RunRecord> runs;
  std::vector<RunFailure> failures;
  MeanStd oa;
  MeanStd aa;
  MeanStd kappa;
  std::vector<MeanStd> per_class;
  // Set when fewer than two runs completed: std is reported as 0.
  bool single_run = false;

  std::string to_json(bool include_timing = true) const;
  // "OA 96.76 ± 0.44" style rows, two decimals.
  std::string format_table(const std::vector<std::string>& class_names = {}) const;
};

// n - 1 denominator; a single value yields std 0.
MeanStd mean_std(const std::vector<double>& values);

// Aggregates test metrics over completed runs.
AggregateReport aggregate(std::vector<RunRecord> runs, std::vector<RunFailure> failures = {});

struct RepeatedSetup {
  const io::HyperspectralCube* cube = nullptr;  // preprocessed
  const io::GroundTruthMap* gt = nullptr;
  double train_fraction = 0.05;
  double val_fraction = 0.05;
  model::ModelConfig model;
  TrainConfig train;
  bool use_double = false;
};

struct RunArtifacts {
  std::uint64_t seed;
  const prep::SplitAssignment* split;
  const std::vector<std::uint8_t>* checkpoint;
  const TrainReport* report;
};

// Run i uses seed base_seed + i for the split (unless resplitting is
// off), the initialization and the training shuffle/dropout. A failing
// run is recorded and skipped with a warning; if every run fails the
// last error is rethrown.
AggregateReport run_repeated(const RepeatedSetup& setup, std::uint64_t base_seed,
                             const std::function<void(const RunArtifacts&)>& on_run = {},
                             const TrainHooks& hooks = {});

}  // namespace sehsn::train
