#include "sehsn/model/config.hpp"

#include <set>
#include <string>

#include <json.hpp>

#include "sehsn/error.hpp"

namespace sehsn::model {
namespace {

using nlohmann::json;

std::string kind_name(Conv2dKind k) { return k == Conv2dKind::kSeparable ? "separable" : "standard"; }

std::string placement_name(SePlacement p) {
  return p == SePlacement::kPreActivation ? "pre_activation" : "post_activation";
}

[[noreturn]] void bad(const std::string& what) { throw ConfigError("model config: " + what); }

template <typename T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(std::string("field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  std::set<std::string> ok(known.begin(), known.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) bad("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

std::string architecture_name(Architecture a) {
  return a == Architecture::kHybridSn ? "hybridsn" : "se_hybridsn";
}

ModelConfig se_hybridsn_config(std::size_t window, std::size_t pca_k, std::size_t num_classes) {
  ModelConfig c;
  c.window = window;
  c.pca_k = pca_k;
  c.num_classes = num_classes;
  c.fc_dims = {256, 128, num_classes};
  return c;
}

ModelConfig hybridsn_config(std::size_t window, std::size_t pca_k, std::size_t num_classes) {
  ModelConfig c;
  c.architecture = Architecture::kHybridSn;
  c.window = window;
  c.pca_k = pca_k;
  c.num_classes = num_classes;
  c.conv3d = {{8, {7, 3, 3}}, {16, {5, 3, 3}}, {32, {3, 3, 3}}};
  c.conv2d = {{Conv2dKind::kStandard, 64, 3}};
  c.use_se = false;
  c.fc_dims = {256, 128, num_classes};
  return c;
}

ModelConfig tiny_config(std::size_t num_classes) {
  ModelConfig c;
  c.window = 5;
  c.pca_k = 8;
  c.num_classes = num_classes;
  c.conv3d = {{2, {3, 3, 3}}, {2, {3, 3, 3}}, {2, {1, 3, 3}}, {2, {1, 3, 3}}};
  c.conv2d = {{Conv2dKind::kStandard, 4, 3}, {Conv2dKind::kSeparable, 4, 3}};
  c.same_padding_3d = true;
  c.same_padding_2d = true;
  c.se_reduction = 2;
  c.fc_dims = {8, 6, num_classes};
  c.dropout_rate = 0.25;
  return c;
}

LayerPlan plan_layers(const ModelConfig& cfg) {
  if (cfg.window == 0 || cfg.window % 2 == 0) bad("window must be odd, got " + std::to_string(cfg.window));
  if (cfg.pca_k == 0) bad("pca_k must be >= 1");
  if (cfg.num_classes < 2) bad("num_classes must be >= 2");
  if (cfg.conv3d.empty()) bad("at least one 3D conv is required");
  if (cfg.se_reduction == 0) bad("se_reduction must be >= 1");
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) bad("dropout_rate must lie in [0, 1)");
  if (cfg.fc_dims.empty() || cfg.fc_dims.back() != cfg.num_classes) {
    bad("fc_dims must end in num_classes (" + std::to_string(cfg.num_classes) + ")");
  }
  for (std::size_t d : cfg.fc_dims) {
    if (d == 0) bad("fc_dims entries must be >= 1");
  }
  const bool se_arch = cfg.architecture == Architecture::kSeHybridSn;
  if (se_arch && (cfg.conv3d.size() != 4 || cfg.conv2d.size() != 2)) {
    bad("se_hybridsn needs 6 convolutional layers (4 three-dimensional + 2 two-dimensional), got " +
        std::to_string(cfg.conv3d.size()) + " + " + std::to_string(cfg.conv2d.size()));
  }
  if (!se_arch && cfg.use_se) bad("the hybridsn baseline has no SE blocks; set use_se = false");
  const bool se = se_arch && cfg.use_se;

  LayerPlan plan;
  std::size_t depth = cfg.pca_k, height = cfg.window, width = cfg.window;
  std::size_t channels = 1;
  std::size_t cumulative = 1;
  for (std::size_t i = 0; i < cfg.conv3d.size(); ++i) {
    const Conv3dSpec& s = cfg.conv3d[i];
    const std::string tag = "conv3d[" + std::to_string(i) + "]";
    if (s.out_channels == 0) bad(tag + " out_channels must be >= 1");
    if (s.kernel.depth % 2 == 0 || s.kernel.height % 2 == 0 || s.kernel.width % 2 == 0 || s.kernel.depth == 0 ||
        s.kernel.height == 0 || s.kernel.width == 0) {
      bad(tag + " kernel extents must be odd");
    }
    if (s.kernel.depth > depth) {
      bad(tag + " spectral kernel " + std::to_string(s.kernel.depth) + " exceeds the remaining depth " +
          std::to_string(depth));
    }
    if (!cfg.same_padding_3d && (s.kernel.height > height || s.kernel.width > width)) {
      bad(tag + " spatial kernel exceeds the remaining " + std::to_string(height) + "x" + std::to_string(width));
    }
    LayerPlan::Block3d b;
    b.in_channels = se_arch ? cumulative : channels;
    b.out_channels = s.out_channels;
    b.depth = depth - s.kernel.depth + 1;
    b.height = cfg.same_padding_3d ? height : height - s.kernel.height + 1;
    b.width = cfg.same_padding_3d ? width : width - s.kernel.width + 1;
    b.se_channels = b.out_channels * b.depth;
    if (se && b.se_channels % cfg.se_reduction != 0) {
      bad(tag + " SE channels " + std::to_string(b.se_channels) + " not divisible by se_reduction " +
          std::to_string(cfg.se_reduction));
    }
    plan.blocks.push_back(b);
    depth = b.depth;
    height = b.height;
    width = b.width;
    channels = s.out_channels;
    cumulative += s.out_channels;
  }
  plan.merged_channels = (se_arch ? cumulative : channels) * depth;
  plan.merged_height = height;
  plan.merged_width = width;

  channels = plan.merged_channels;
  for (std::size_t i = 0; i < cfg.conv2d.size(); ++i) {
    const Conv2dSpec& s = cfg.conv2d[i];
    const std::string tag = "conv2d[" + std::to_string(i) + "]";
    if (s.out_channels == 0) bad(tag + " out_channels must be >= 1");
    if (s.kernel == 0 || s.kernel % 2 == 0) bad(tag + " kernel must be odd");
    if (!se_arch && s.kind == Conv2dKind::kSeparable) bad(tag + " separable convs belong to se_hybridsn");
    if (!cfg.same_padding_2d && (s.kernel > height || s.kernel > width)) {
      bad(tag + " kernel exceeds the remaining " + std::to_string(height) + "x" + std::to_string(width));
    }
    if (se && s.out_channels % cfg.se_reduction != 0) {
      bad(tag + " SE channels " + std::to_string(s.out_channels) + " not divisible by se_reduction " +
          std::to_string(cfg.se_reduction));
    }
    if (!cfg.same_padding_2d) {
      height -= s.kernel - 1;
      width -= s.kernel - 1;
    }
    plan.stages.push_back({channels, s.out_channels, height, width});
    channels = s.out_channels;
  }
  plan.flatten_dim = channels * height * width;
  return plan;
}

void validate_config(const ModelConfig& cfg) { (void)plan_layers(cfg); }

std::string config_to_json(const ModelConfig& cfg) {
  json j;
  j["architecture"] = architecture_name(cfg.architecture);
  j["window"] = cfg.window;
  j["pca_k"] = cfg.pca_k;
  j["num_classes"] = cfg.num_classes;
  json c3 = json::array();
  for (const auto& s : cfg.conv3d) {
    c3.push_back({{"out_channels", s.out_channels},
                  {"kernel", {s.kernel.depth, s.kernel.height, s.kernel.width}}});
  }
  j["conv3d"] = c3;
  json c2 = json::array();
  for (const auto& s : cfg.conv2d) {
    c2.push_back({{"kind", kind_name(s.kind)}, {"out_channels", s.out_channels}, {"kernel", s.kernel}});
  }
  j["conv2d"] = c2;
  j["same_padding_3d"] = cfg.same_padding_3d;
  j["same_padding_2d"] = cfg.same_padding_2d;
  j["use_se"] = cfg.use_se;
  j["se_reduction"] = cfg.se_reduction;
  j["se_placement"] = placement_name(cfg.se_placement);
  j["fc_dims"] = cfg.fc_dims;
  j["dropout_rate"] = cfg.dropout_rate;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

ModelConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"architecture", "window", "pca_k", "num_classes", "conv3d", "conv2d", "same_padding_3d",
                  "same_padding_2d", "use_se", "se_reduction", "se_placement", "fc_dims", "dropout_rate", "seed"},
                 "model");
  const std::string arch = get<std::string>(j, "architecture", "se_hybridsn");
  ModelConfig c;
  if (arch == "hybridsn") {
    c = hybridsn_config(19, 30, 16);
  } else if (arch != "se_hybridsn") {
    bad("architecture must be se_hybridsn or hybridsn, got '" + arch + "'");
  }
  c.window = get<std::size_t>(j, "window", c.window);
  c.pca_k = get<std::size_t>(j, "pca_k", c.pca_k);
  c.num_classes = get<std::size_t>(j, "num_classes", c.num_classes);
  c.fc_dims = {256, 128, c.num_classes};
  if (j.contains("conv3d")) {
    c.conv3d.clear();
    for (const auto& e : j.at("conv3d")) {
      reject_unknown(e, {"out_channels", "kernel"}, "conv3d entry");
      const auto k = get<std::vector<std::size_t>>(e, "kernel", {});
      if (k.size() != 3) bad("conv3d kernel must have 3 extents (spectral, row, col)");
      c.conv3d.push_back({get<std::size_t>(e, "out_channels", 0), {k[0], k[1], k[2]}});
    }
  }
  if (j.contains("conv2d")) {
    c.conv2d.clear();
    for (const auto& e : j.at("conv2d")) {
      reject_unknown(e, {"kind", "out_channels", "kernel"}, "conv2d entry");
      const std::string kind = get<std::string>(e, "kind", "standard");
      if (kind != "standard" && kind != "separable") bad("conv2d kind must be standard or separable");
      c.conv2d.push_back({kind == "separable" ? Conv2dKind::kSeparable : Conv2dKind::kStandard,
                          get<std::size_t>(e, "out_channels", 0), get<std::size_t>(e, "kernel", 3)});
    }
  }
  c.same_padding_3d = get<bool>(j, "same_padding_3d", c.same_padding_3d);
  c.same_padding_2d = get<bool>(j, "same_padding_2d", c.same_padding_2d);
  c.use_se = get<bool>(j, "use_se", c.use_se);
  c.se_reduction = get<std::size_t>(j, "se_reduction", c.se_reduction);
  const std::string placement = get<std::string>(j, "se_placement", placement_name(c.se_placement));
  if (placement == "pre_activation") {
    c.se_placement = SePlacement::kPreActivation;
  } else if (placement == "post_activation") {
    c.se_placement = SePlacement::kPostActivation;
  } else {
    bad("se_placement must be pre_activation or post_activation");
  }
  c.fc_dims = get<std::vector<std::size_t>>(j, "fc_dims", c.fc_dims);
  c.dropout_rate = get<double>(j, "dropout_rate", c.dropout_rate);
  c.seed = get<std::uint64_t>(j, "seed", c.seed);
  validate_config(c);
  return c;
}

}  // namespace sehsn::model
