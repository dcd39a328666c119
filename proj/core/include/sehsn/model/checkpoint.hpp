#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sehsn/model/config.hpp"
#include "sehsn/model/network.hpp"
#include "sehsn/nn/tensor.hpp"

namespace sehsn::model {

// Layout (all integers little-endian):
//   "SEHSNCKP"  u32 version  u32 n  config JSON[n]
//   u32 tensor count, then per tensor:
//     u32 name length, name, u32 rank, u64 extents[rank], f64 values
//   u64 FNV-1a digest of every preceding byte
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointContents {
  ModelConfig config;
  std::vector<std::pair<std::string, nn::Tensor<double>>> tensors;
};

template <typename T>
std::vector<std::uint8_t> encode_checkpoint(const Network<T>& net);

// Verifies the digest before reading anything else, so a damaged file
// never yields a partial model.
CheckpointContents decode_checkpoint(const std::vector<std::uint8_t>& bytes);

template <typename T>
void save_checkpoint(const Network<T>& net, const std::filesystem::path& path);

template <typename T>
Network<T> load_checkpoint(const std::filesystem::path& path);

// Loads parameters into an existing network; a tensor whose name or shape
// does not match raises ShapeError naming it.
template <typename T>
void load_checkpoint_into(Network<T>& net, const std::filesystem::path& path);

template <typename T>
void assign_parameters(Network<T>& net, const CheckpointContents& contents);

}  // namespace sehsn::model
