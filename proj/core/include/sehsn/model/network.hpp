#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sehsn/model/config.hpp"
#include "sehsn/nn/conv.hpp"
#include "sehsn/nn/dense.hpp"
#include "sehsn/nn/depthwise.hpp"
#include "sehsn/nn/se_block.hpp"
#include "sehsn/nn/tensor.hpp"

namespace sehsn::model {

// All trainable tensors of a network. A second instance of the same shape
// holds the gradients.
template <typename T>
struct Layers {
  std::vector<nn::Conv3d<T>> conv3d;
  std::vector<nn::SeBlock<T>> se3d;  // empty without SE
  // 2D stage i is conv2d[i] or sepconv[i] depending on the config kind;
  // the unused slot stays default-constructed.
  std::vector<nn::Conv2d<T>> conv2d;
  std::vector<nn::DepthwiseSeparableConv2d<T>> sepconv;
  std::vector<nn::SeBlock<T>> se2d;
  std::vector<nn::Dense<T>> fc;
};

template <typename T>
struct ParamRef {
  std::string name;
  nn::Tensor<T>* value;
  nn::Tensor<T>* grad;
};

template <typename T>
struct ConstParamRef {
  std::string name;
  const nn::Tensor<T>* value;
  const nn::Tensor<T>* grad;
};

// Intermediates a training forward keeps for backward.
template <typename T>
struct ForwardCache {
  struct Conv {
    nn::Tensor<T> input;     // conv input, padded if needed
    nn::Tensor<T> relu_out;  // output of the ReLU
    nn::SeCache<T> se;
    bool has_se = false;
    bool ablated = false;
    nn::DepthwiseSeparableCache<T> sep;
  };
  std::vector<nn::Shape> feature_shapes;  // block input and each 3D output
  std::vector<Conv> blocks;
  nn::Shape block_output_shape;  // rank 5, before the merge
  std::vector<Conv> stages;
  nn::Shape stage_output_shape;  // rank 4, before the flatten
  std::vector<nn::Tensor<T>> fc_inputs;
  std::vector<nn::Tensor<T>> fc_relu;
  std::vector<nn::Tensor<T>> fc_masks;
};

template <typename T>
class Network {
 public:
  explicit Network(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  const LayerPlan& plan() const { return plan_; }

  // batch [B, 1, pca_k, window, window] -> logits [B, num_classes].
  // training = true applies dropout and keeps what backward needs.
  nn::Tensor<T> forward(const nn::Tensor<T>& batch, bool training);
  // Inference without touching any cached state; safe to call from
  // several threads on one network.
  nn::Tensor<T> predict_logits(const nn::Tensor<T>& batch) const;

  // Overwrites the gradient set from d loss / d logits of the last
  // training forward. Throws if there is no cached training pass.
  void backward(const nn::Tensor<T>& grad_logits);
  void zero_grad();

  std::vector<ParamRef<T>> parameters();
  std::vector<ConstParamRef<T>> parameters() const;
  std::size_t parameter_count() const;
  std::size_t conv_layer_count() const;

  // Dropout masks are a function of (config seed, epoch, batch, layer).
  void set_dropout_context(std::uint64_t epoch, std::uint64_t batch);

  // Debug probes.
  void set_force_unit_gates(bool on) { unit_gates_ = on; }
  void set_ablated_block_layer(std::optional<std::size_t> layer) { ablated_ = layer; }
  void set_record_block_inputs(bool on) { record_inputs_ = on; }
  // Input of every 3D conv from the last forward (when recording).
  const std::vector<nn::Tensor<T>>& block_inputs() const { return block_inputs_; }

  // Hash of which ReLU units were active in the last training forward
  // (conv, SE bottleneck and FC ReLUs). Used to detect kinks in
  // finite-difference checks.
  std::uint64_t activation_pattern() const;

  Layers<T>& layers() { return params_; }
  const Layers<T>& layers() const { return params_; }

 private:
  nn::Tensor<T> run(const nn::Tensor<T>& batch, bool training, ForwardCache<T>* cache,
                    std::vector<nn::Tensor<T>>* inputs_out) const;

  ModelConfig cfg_;
  LayerPlan plan_;
  Layers<T> params_;
  Layers<T> grads_;
  bool unit_gates_ = false;
  std::optional<std::size_t> ablated_;
  bool record_inputs_ = false;
  std::uint64_t dropout_epoch_ = 0;
  std::uint64_t dropout_batch_ = 0;
  std::vector<nn::Tensor<T>> block_inputs_;
  std::optional<ForwardCache<T>> cache_;
};

// Parameter count implied by a config, without allocating the network.
std::size_t count_parameters(const ModelConfig& cfg);

// Patch layout expected by forward: channel-major [B, 1, D, H, W].
template <typename T>
nn::Shape input_shape(const ModelConfig& cfg, std::size_t batch) {
  return {batch, 1, cfg.pca_k, cfg.window, cfg.window};
}

extern template class Network<float>;
extern template class Network<double>;

}  // namespace sehsn::model
