#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sehsn/nn/conv.hpp"

namespace sehsn::model {

// kSeHybridSn: densely connected 3D block, SE after every conv, 2D stage
// that may contain depthwise-separable layers.
// kHybridSn: plain 3D chain then 2D conv, no SE, used as the baseline.
enum class Architecture { kSeHybridSn, kHybridSn };

// Where the SE gate sits relative to the ReLU of its conv.
enum class SePlacement { kPostActivation, kPreActivation };

enum class Conv2dKind { kStandard, kSeparable };

struct Conv3dSpec {
  std::size_t out_channels = 0;
  nn::Extent3 kernel;  // spectral x row x col
  friend bool operator==(const Conv3dSpec&, const Conv3dSpec&) = default;
};

struct Conv2dSpec {
  Conv2dKind kind = Conv2dKind::kStandard;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  friend bool operator==(const Conv2dSpec&, const Conv2dSpec&) = default;
};

struct ModelConfig {
  Architecture architecture = Architecture::kSeHybridSn;
  std::size_t window = 19;
  std::size_t pca_k = 30;
  std::size_t num_classes = 16;
  std::vector<Conv3dSpec> conv3d = {
      {8, {7, 3, 3}}, {16, {5, 3, 3}}, {16, {3, 3, 3}}, {16, {3, 3, 3}}};
  std::vector<Conv2dSpec> conv2d = {{Conv2dKind::kStandard, 64, 3}, {Conv2dKind::kSeparable, 128, 3}};
  // Zero-pad spatially so convs keep H x W; otherwise valid support.
  bool same_padding_3d = false;
  bool same_padding_2d = false;
  bool use_se = true;
  std::size_t se_reduction = 8;
  SePlacement se_placement = SePlacement::kPostActivation;
  std::vector<std::size_t> fc_dims = {256, 128, 16};  // last = num_classes
  double dropout_rate = 0.4;
  std::uint64_t seed = 0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

ModelConfig se_hybridsn_config(std::size_t window, std::size_t pca_k, std::size_t num_classes);
// 3D 8@7x3x3, 16@5x3x3, 32@3x3x3; 2D 64@3x3; FC 256, 128.
ModelConfig hybridsn_config(std::size_t window, std::size_t pca_k, std::size_t num_classes);

// Window 5, pca_k 8, same padding, narrow layers and SE reduction 2:
// small enough for whole-model finite differences and smoke runs.
ModelConfig tiny_config(std::size_t num_classes = 2);

// Per-layer extents the config implies; validation walks the same plan.
struct LayerPlan {
  struct Block3d {
    std::size_t in_channels;
    std::size_t out_channels;
    std::size_t depth, height, width;  // output extents
    std::size_t se_channels;           // out_channels * depth
  };
  struct Stage2d {
    std::size_t in_channels;
    std::size_t out_channels;
    std::size_t height, width;
  };
  std::vector<Block3d> blocks;
  std::size_t merged_channels = 0;  // 2D stage input channels
  std::size_t merged_height = 0;
  std::size_t merged_width = 0;
  std::vector<Stage2d> stages;
  std::size_t flatten_dim = 0;
};

// Throws ConfigError describing the first inconsistency (spectral or
// spatial extent exhausted, SE reduction not dividing a channel count,
// wrong conv layer count, ...).
LayerPlan plan_layers(const ModelConfig& cfg);
void validate_config(const ModelConfig& cfg);

// Every field is written; reading accepts a subset and fills defaults,
// rejecting unknown keys.
std::string config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(std::string_view text);

std::string architecture_name(Architecture a);

}  // namespace sehsn::model
