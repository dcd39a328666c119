#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sehsn/model/config.hpp"
#include "sehsn/train/trainer.hpp"

namespace sehsn::app {

// Fully resolved run configuration: TOML file, then command-line flags on
// top, then defaults for anything still unset.
struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string precision = "f32";  // training/inference arithmetic
  std::size_t window = 19;
  std::size_t pca_k = 30;
  double train_fraction = 0.05;
  double val_fraction = 0.05;
  model::ModelConfig model;
  train::TrainConfig train;
};

struct Overrides {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> repeats;
};

RunConfig resolve_config(const Overrides& overrides);
std::string format_config_toml(const RunConfig& cfg);

// Everything under <out>/prepared.
struct PreparedPaths {
  std::filesystem::path dir, cube, cube_sidecar, ground_truth, pca, split, counts_csv, summary, meta;
  explicit PreparedPaths(const std::filesystem::path& out);
};

int cmd_prepare(const RunConfig& cfg, std::ostream& out);
int cmd_train(const RunConfig& cfg, std::ostream& out);
int cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint, std::ostream& out);
int cmd_map(const RunConfig& cfg, const std::filesystem::path& checkpoint, bool all_pixels, std::ostream& out);
int cmd_selfcheck(const std::optional<std::string>& fault, std::ostream& out);

// argv-level entry point; maps library errors onto exit codes
// (0 ok, 1 usage/config, 2 data, 3 numerical).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sehsn::app
