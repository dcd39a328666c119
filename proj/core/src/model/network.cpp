#include "sehsn/model/network.hpp"

#include <string>
#include <utility>

#include "sehsn/error.hpp"
#include "sehsn/hash.hpp"
#include "sehsn/nn/activation.hpp"
#include "sehsn/nn/init.hpp"
#include "sehsn/nn/reshape.hpp"
#include "sehsn/random.hpp"

namespace sehsn::model {
namespace {

using nn::Tensor;

std::uint64_t layer_seed(std::uint64_t seed, const std::string& name) { return mix_seed(seed, fnv1a64(name)); }

template <typename T>
void add_into(Tensor<T>& acc, const Tensor<T>& x) {
  acc.expect_shape(x.shape(), "gradient accumulation");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

// Crops every feature to the extents of the last one and concatenates
// them along the channel axis.
template <typename T>
Tensor<T> dense_concat(const std::vector<Tensor<T>>& feats) {
  const nn::Shape& last = feats.back().shape();
  std::vector<Tensor<T>> parts;
  parts.reserve(feats.size());
  std::vector<const Tensor<T>*> ptrs;
  for (const auto& f : feats) {
    parts.push_back(nn::center_crop(f, last[2], last[3], last[4]));
    ptrs.push_back(&parts.back());
  }
  return nn::concat_channels<T>(ptrs);
}

// Routes the gradient of a dense concat back onto the features it read.
template <typename T>
void dense_concat_backward(const Tensor<T>& grad, const std::vector<nn::Shape>& shapes, std::size_t count,
                           std::vector<Tensor<T>>& feature_grads) {
  std::vector<std::size_t> channels;
  for (std::size_t k = 0; k < count; ++k) channels.push_back(shapes[k][1]);
  std::vector<Tensor<T>> parts = nn::split_concat(grad, channels);
  for (std::size_t k = 0; k < count; ++k) add_into(feature_grads[k], nn::center_crop_backward(parts[k], shapes[k]));
}

template <typename L, typename F>
void visit_params(L& p, L& g, const ModelConfig& cfg, F&& f) {
  auto se = [&](const std::string& prefix, auto& a, auto& b) {
    f(prefix + ".fc1.weight", a.fc1.weight, b.fc1.weight);
    f(prefix + ".fc1.bias", a.fc1.bias, b.fc1.bias);
    f(prefix + ".fc2.weight", a.fc2.weight, b.fc2.weight);
    f(prefix + ".fc2.bias", a.fc2.bias, b.fc2.bias);
  };
  for (std::size_t i = 0; i < p.conv3d.size(); ++i) {
    const std::string n = "conv3d." + std::to_string(i);
    f(n + ".weight", p.conv3d[i].weight, g.conv3d[i].weight);
    f(n + ".bias", p.conv3d[i].bias, g.conv3d[i].bias);
    if (!p.se3d.empty()) se("se3d." + std::to_string(i), p.se3d[i], g.se3d[i]);
  }
  for (std::size_t j = 0; j < cfg.conv2d.size(); ++j) {
    const std::string n = "conv2d." + std::to_string(j);
    if (cfg.conv2d[j].kind == Conv2dKind::kStandard) {
      f(n + ".weight", p.conv2d[j].weight, g.conv2d[j].weight);
      f(n + ".bias", p.conv2d[j].bias, g.conv2d[j].bias);
    } else {
      f(n + ".depthwise", p.sepconv[j].depthwise, g.sepconv[j].depthwise);
      f(n + ".pointwise.weight", p.sepconv[j].pointwise.weight, g.sepconv[j].pointwise.weight);
      f(n + ".pointwise.bias", p.sepconv[j].pointwise.bias, g.sepconv[j].pointwise.bias);
    }
    if (!p.se2d.empty()) se("se2d." + std::to_string(j), p.se2d[j], g.se2d[j]);
  }
  for (std::size_t k = 0; k < p.fc.size(); ++k) {
    const std::string n = "fc." + std::to_string(k);
    f(n + ".weight", p.fc[k].weight, g.fc[k].weight);
    f(n + ".bias", p.fc[k].bias, g.fc[k].bias);
  }
}

template <typename T>
void store_se_grads(nn::SeBlock<T>& dst, nn::SeGrads<T>& g) {
  dst.fc1.weight = std::move(g.fc1.weight);
  dst.fc1.bias = std::move(g.fc1.bias);
  dst.fc2.weight = std::move(g.fc2.weight);
  dst.fc2.bias = std::move(g.fc2.bias);
}

// ReLU plus optional SE in the configured order. `groups` > 0 means the
// input is rank 5 and SE sees the merged [B, N*D, H, W] view.
template <typename T>
Tensor<T> activate(Tensor<T> pre, const nn::SeBlock<T>* se, std::size_t groups, SePlacement placement,
                   bool unit_gates, typename ForwardCache<T>::Conv* c) {
  auto gate = [&](Tensor<T> x) {
    if (!se) return x;
    Tensor<T> m = groups ? nn::merge_channels(std::move(x)) : std::move(x);
    Tensor<T> s = nn::se_forward(m, *se, c ? &c->se : nullptr, unit_gates);
    if (c) c->has_se = true;
    return groups ? nn::split_channels(std::move(s), groups) : s;
  };
  if (placement == SePlacement::kPostActivation) {
    Tensor<T> a = nn::relu_forward(pre);
    if (c) c->relu_out = a;
    return gate(std::move(a));
  }
  Tensor<T> a = nn::relu_forward(gate(std::move(pre)));
  if (c) c->relu_out = a;
  return a;
}

template <typename T>
Tensor<T> activate_backward(Tensor<T> g, const typename ForwardCache<T>::Conv& c, const nn::SeBlock<T>* se,
                            nn::SeBlock<T>* se_grad, std::size_t groups, SePlacement placement) {
  auto gate = [&](Tensor<T> x) {
    if (!se) return x;
    Tensor<T> m = groups ? nn::merge_channels(std::move(x)) : std::move(x);
    nn::SeGrads<T> sg = nn::se_backward(c.se, *se, m);
    store_se_grads(*se_grad, sg);
    return groups ? nn::split_channels(std::move(sg.input), groups) : std::move(sg.input);
  };
  if (placement == SePlacement::kPostActivation) return nn::relu_backward(c.relu_out, gate(std::move(g)));
  return gate(nn::relu_backward(c.relu_out, g));
}

}  // namespace

template <typename T>
Network<T>::Network(ModelConfig cfg) : cfg_(std::move(cfg)), plan_(plan_layers(cfg_)) {
  const bool se_arch = cfg_.architecture == Architecture::kSeHybridSn;
  const bool se = se_arch && cfg_.use_se;
  for (std::size_t i = 0; i < cfg_.conv3d.size(); ++i) {
    const auto& b = plan_.blocks[i];
    const std::string n = "conv3d." + std::to_string(i);
    params_.conv3d.emplace_back(b.in_channels, b.out_channels, cfg_.conv3d[i].kernel);
    nn::init_parameters(params_.conv3d.back(), layer_seed(cfg_.seed, n));
    if (se) {
      params_.se3d.emplace_back(b.se_channels, cfg_.se_reduction);
      nn::init_parameters(params_.se3d.back(), layer_seed(cfg_.seed, "se3d." + std::to_string(i)));
    }
  }
  for (std::size_t j = 0; j < cfg_.conv2d.size(); ++j) {
    const auto& s = cfg_.conv2d[j];
    const auto& st = plan_.stages[j];
    const std::string n = "conv2d." + std::to_string(j);
    if (s.kind == Conv2dKind::kStandard) {
      params_.conv2d.emplace_back(st.in_channels, st.out_channels, s.kernel, s.kernel);
      params_.sepconv.emplace_back();
      nn::init_parameters(params_.conv2d.back(), layer_seed(cfg_.seed, n));
    } else {
      params_.conv2d.emplace_back();
      params_.sepconv.emplace_back(st.in_channels, st.out_channels, s.kernel,
                                   cfg_.same_padding_2d ? s.kernel / 2 : 0);
      nn::init_parameters(params_.sepconv.back(), layer_seed(cfg_.seed, n));
    }
    if (se) {
      params_.se2d.emplace_back(st.out_channels, cfg_.se_reduction);
      nn::init_parameters(params_.se2d.back(), layer_seed(cfg_.seed, "se2d." + std::to_string(j)));
    }
  }
  std::size_t prev = plan_.flatten_dim;
  for (std::size_t k = 0; k < cfg_.fc_dims.size(); ++k) {
    params_.fc.emplace_back(prev, cfg_.fc_dims[k]);
    nn::init_parameters(params_.fc.back(), layer_seed(cfg_.seed, "fc." + std::to_string(k)));
    prev = cfg_.fc_dims[k];
  }
  grads_ = params_;
  zero_grad();
}

template <typename T>
void Network<T>::zero_grad() {
  visit_params(params_, grads_, cfg_, [](const std::string&, Tensor<T>&, Tensor<T>& g) { g.zero(); });
}

template <typename T>
std::vector<ParamRef<T>> Network<T>::parameters() {
  std::vector<ParamRef<T>> out;
  visit_params(params_, grads_, cfg_,
               [&](const std::string& n, Tensor<T>& p, Tensor<T>& g) { out.push_back({n, &p, &g}); });
  return out;
}

template <typename T>
std::vector<ConstParamRef<T>> Network<T>::parameters() const {
  std::vector<ConstParamRef<T>> out;
  visit_params(params_, grads_, cfg_,
               [&](const std::string& n, const Tensor<T>& p, const Tensor<T>& g) { out.push_back({n, &p, &g}); });
  return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.value->size();
  return n;
}

template <typename T>
std::size_t Network<T>::conv_layer_count() const {
  return cfg_.conv3d.size() + cfg_.conv2d.size();
}

template <typename T>
void Network<T>::set_dropout_context(std::uint64_t epoch, std::uint64_t batch) {
  dropout_epoch_ = epoch;
  dropout_batch_ = batch;
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& batch, bool training) {
  block_inputs_.clear();
  cache_.reset();
  ForwardCache<T> cache;
  Tensor<T> out = run(batch, training, training ? &cache : nullptr, record_inputs_ ? &block_inputs_ : nullptr);
  if (training) cache_ = std::move(cache);
  return out;
}

template <typename T>
Tensor<T> Network<T>::predict_logits(const Tensor<T>& batch) const {
  return run(batch, false, nullptr, nullptr);
}

template <typename T>
Tensor<T> Network<T>::run(const Tensor<T>& batch, bool training, ForwardCache<T>* cache,
                          std::vector<Tensor<T>>* inputs_out) const {
  if (batch.rank() != 5 || batch.dim(0) == 0) {
    throw ShapeError("forward: expected a [B, 1, D, H, W] batch, got " + nn::shape_string(batch.shape()));
  }
  batch.expect_shape(input_shape<T>(cfg_, batch.dim(0)), "forward input");
  const std::size_t bsz = batch.dim(0);
  const bool se_arch = cfg_.architecture == Architecture::kSeHybridSn;
  const SePlacement placement = cfg_.se_placement;
  using Conv = typename ForwardCache<T>::Conv;

  std::vector<Tensor<T>> feats;
  feats.push_back(batch);
  if (cache) cache->feature_shapes.push_back(batch.shape());
  for (std::size_t i = 0; i < params_.conv3d.size(); ++i) {
    const auto& layer = params_.conv3d[i];
    Tensor<T> in = se_arch ? dense_concat(feats) : feats.back();
    if (!se_arch) feats.erase(feats.begin(), feats.end() - 1);
    if (inputs_out) inputs_out->push_back(in);
    if (cfg_.same_padding_3d) in = nn::pad_spatial(in, layer.kernel.height / 2, layer.kernel.width / 2);
    Conv c;
    Conv* cp = cache ? &c : nullptr;
    Tensor<T> out = activate(nn::conv3d_forward(in, layer), params_.se3d.empty() ? nullptr : &params_.se3d[i],
                             layer.out_channels, placement, unit_gates_, cp);
    if (ablated_ && *ablated_ == i) {
      out.zero();
      c.ablated = true;
    }
    if (cache) {
      c.input = std::move(in);
      cache->blocks.push_back(std::move(c));
      cache->feature_shapes.push_back(out.shape());
    }
    feats.push_back(std::move(out));
  }

  Tensor<T> x = se_arch ? dense_concat(feats) : std::move(feats.back());
  feats.clear();
  if (cache) cache->block_output_shape = x.shape();
  x = nn::merge_channels(std::move(x));

  for (std::size_t j = 0; j < cfg_.conv2d.size(); ++j) {
    Conv c;
    Conv* cp = cache ? &c : nullptr;
    Tensor<T> pre;
    if (cfg_.conv2d[j].kind == Conv2dKind::kStandard) {
      const auto& layer = params_.conv2d[j];
      if (cfg_.same_padding_2d) x = nn::pad_spatial(x, layer.kernel_h / 2, layer.kernel_w / 2);
      pre = nn::conv2d_forward(x, layer);
      if (cache) c.input = std::move(x);
    } else {
      pre = nn::depthwise_separable_forward(x, params_.sepconv[j], cp ? &c.sep : nullptr);
    }
    x = activate(std::move(pre), params_.se2d.empty() ? nullptr : &params_.se2d[j], 0, placement, unit_gates_, cp);
    if (cache) cache->stages.push_back(std::move(c));
  }
  if (cache) cache->stage_output_shape = x.shape();
  x.reshape({bsz, plan_.flatten_dim});

  const std::size_t nfc = params_.fc.size();
  for (std::size_t k = 0; k < nfc; ++k) {
    Tensor<T> z = nn::dense_forward(x, params_.fc[k]);
    if (cache) cache->fc_inputs.push_back(std::move(x));
    if (k + 1 == nfc) {
      x = std::move(z);
      break;
    }
    Tensor<T> a = nn::relu_forward(z);
    const std::uint64_t seed = mix_seed(mix_seed(mix_seed(cfg_.seed, dropout_epoch_), dropout_batch_), 0xd0 + k);
    Tensor<T> mask;
    x = nn::dropout_forward(a, cfg_.dropout_rate, seed, training, cache ? &mask : nullptr);
    if (cache) {
      cache->fc_relu.push_back(std::move(a));
      cache->fc_masks.push_back(std::move(mask));
    }
  }
  return x;
}

template <typename T>
void Network<T>::backward(const Tensor<T>& grad_logits) {
  if (!cache_) throw Error("backward: no cached training forward pass");
  ForwardCache<T>& cache = *cache_;
  const bool se_arch = cfg_.architecture == Architecture::kSeHybridSn;
  const SePlacement placement = cfg_.se_placement;
  const std::size_t bsz = cache.feature_shapes.front()[0];
  grad_logits.expect_shape({bsz, cfg_.num_classes}, "backward grad_logits");

  Tensor<T> g = grad_logits;
  for (std::size_t k = params_.fc.size(); k-- > 0;) {
    if (k + 1 < params_.fc.size()) {
      g = nn::relu_backward(cache.fc_relu[k], nn::dropout_backward(cache.fc_masks[k], g));
    }
    nn::DenseGrads<T> dg = nn::dense_backward(cache.fc_inputs[k], params_.fc[k], g);
    grads_.fc[k].weight = std::move(dg.weight);
    grads_.fc[k].bias = std::move(dg.bias);
    g = std::move(dg.input);
  }
  g.reshape(cache.stage_output_shape);

  for (std::size_t j = cfg_.conv2d.size(); j-- > 0;) {
    const auto& c = cache.stages[j];
    g = activate_backward(std::move(g), c, params_.se2d.empty() ? nullptr : &params_.se2d[j],
                          params_.se2d.empty() ? nullptr : &grads_.se2d[j], 0, placement);
    if (cfg_.conv2d[j].kind == Conv2dKind::kStandard) {
      const auto& layer = params_.conv2d[j];
      nn::ConvGrads<T> cg = nn::conv2d_backward(c.input, layer, g);
      grads_.conv2d[j].weight = std::move(cg.weight);
      grads_.conv2d[j].bias = std::move(cg.bias);
      g = cfg_.same_padding_2d ? nn::unpad_spatial(cg.input, layer.kernel_h / 2, layer.kernel_w / 2)
                               : std::move(cg.input);
    } else {
      nn::DepthwiseSeparableGrads<T> sg = nn::depthwise_separable_backward(c.sep, params_.sepconv[j], g);
      grads_.sepconv[j].depthwise = std::move(sg.depthwise);
      grads_.sepconv[j].pointwise.weight = std::move(sg.pointwise_weight);
      grads_.sepconv[j].pointwise.bias = std::move(sg.pointwise_bias);
      g = std::move(sg.input);
    }
  }
  g = nn::split_channels(std::move(g), cache.block_output_shape[1]);

  const std::size_t nblocks = params_.conv3d.size();
  auto block_backward = [&](std::size_t i, Tensor<T> gi) {
    const auto& c = cache.blocks[i];
    const auto& layer = params_.conv3d[i];
    if (c.ablated) gi.zero();
    gi = activate_backward(std::move(gi), c, params_.se3d.empty() ? nullptr : &params_.se3d[i],
                           params_.se3d.empty() ? nullptr : &grads_.se3d[i], layer.out_channels, placement);
    nn::ConvGrads<T> cg = nn::conv3d_backward(c.input, layer, gi);
    grads_.conv3d[i].weight = std::move(cg.weight);
    grads_.conv3d[i].bias = std::move(cg.bias);
    return cfg_.same_padding_3d ? nn::unpad_spatial(cg.input, layer.kernel.height / 2, layer.kernel.width / 2)
                                : std::move(cg.input);
  };
  if (se_arch) {
    std::vector<Tensor<T>> feature_grads;
    for (const auto& s : cache.feature_shapes) feature_grads.emplace_back(s);
    dense_concat_backward(g, cache.feature_shapes, nblocks + 1, feature_grads);
    for (std::size_t i = nblocks; i-- > 0;) {
      Tensor<T> gin = block_backward(i, std::move(feature_grads[i + 1]));
      dense_concat_backward(gin, cache.feature_shapes, i + 1, feature_grads);
    }
  } else {
    for (std::size_t i = nblocks; i-- > 0;) g = block_backward(i, std::move(g));
  }
}

template <typename T>
std::uint64_t Network<T>::activation_pattern() const {
  if (!cache_) throw Error("activation_pattern: no cached training forward pass");
  Fnv1a64 h;
  auto add = [&](const Tensor<T>& t) {
    std::uint8_t byte = 0;
    std::size_t bit = 0;
    for (T v : t.values()) {
      byte = static_cast<std::uint8_t>(byte | ((v > T{0} ? 1u : 0u) << bit));
      if (++bit == 8) {
        h.update(std::span<const std::uint8_t>(&byte, 1));
        byte = 0;
        bit = 0;
      }
    }
    h.update(std::span<const std::uint8_t>(&byte, 1));
  };
  for (const auto* group : {&cache_->blocks, &cache_->stages}) {
    for (const auto& c : *group) {
      add(c.relu_out);
      if (c.has_se && !c.se.unit_gate) add(c.se.hidden);
    }
  }
  for (const auto& t : cache_->fc_relu) add(t);
  return h.digest();
}

std::size_t count_parameters(const ModelConfig& cfg) { return Network<float>(cfg).parameter_count(); }

template class Network<float>;
template class Network<double>;

}  // namespace sehsn::model
