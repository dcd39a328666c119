#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sehsn/error.hpp"
#include "sehsn/train/repeated.hpp"
#include "sehsn/train/trainer.hpp"

namespace sehsn::train {
namespace {

using nlohmann::json;

json metrics_json(const metrics::MetricsReport& m) { return json::parse(m.to_json()); }

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

template <typename U>
U get(const json& j, const char* key, U fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<U>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: field '") + key + "': " + e.what());
  }
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

}  // namespace

std::string train_config_to_json(const TrainConfig& c) {
  json j;
  j["optimizer"] = c.optimizer.kind == OptimizerKind::kAdam ? "adam" : "sgd";
  j["learning_rate"] = c.optimizer.learning_rate;
  j["beta1"] = c.optimizer.beta1;
  j["beta2"] = c.optimizer.beta2;
  j["eps"] = c.optimizer.eps;
  j["momentum"] = c.optimizer.momentum;
  j["batch_size"] = c.batch_size;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["seed"] = c.seed;
  j["repeats"] = c.repeats;
  j["resplit_per_repeat"] = c.resplit_per_repeat;
  j["track_train_accuracy"] = c.track_train_accuracy;
  j["stop_on_perfect_train"] = c.stop_on_perfect_train;
  j["eval_threads"] = c.eval_threads;
  return j.dump(2);
}

TrainConfig train_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("train config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("train config must be an object");
  static const std::set<std::string> known = {
      "optimizer", "learning_rate", "beta1", "beta2", "eps", "momentum", "batch_size", "max_epochs", "patience",
      "seed", "repeats", "resplit_per_repeat", "track_train_accuracy", "stop_on_perfect_train", "eval_threads"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("train config: unknown key '" + key + "'");
  }
  TrainConfig c;
  const std::string kind = get<std::string>(j, "optimizer", "adam");
  if (kind == "adam") {
    c.optimizer.kind = OptimizerKind::kAdam;
  } else if (kind == "sgd") {
    c.optimizer.kind = OptimizerKind::kSgd;
  } else {
    throw ConfigError("train config: optimizer must be adam or sgd, got '" + kind + "'");
  }
  c.optimizer.learning_rate = get(j, "learning_rate", c.optimizer.learning_rate);
  c.optimizer.beta1 = get(j, "beta1", c.optimizer.beta1);
  c.optimizer.beta2 = get(j, "beta2", c.optimizer.beta2);
  c.optimizer.eps = get(j, "eps", c.optimizer.eps);
  c.optimizer.momentum = get(j, "momentum", c.optimizer.momentum);
  c.batch_size = get(j, "batch_size", c.batch_size);
  c.max_epochs = get(j, "max_epochs", c.max_epochs);
  c.patience = get(j, "patience", c.patience);
  c.seed = get(j, "seed", c.seed);
  c.repeats = get(j, "repeats", c.repeats);
  c.resplit_per_repeat = get(j, "resplit_per_repeat", c.resplit_per_repeat);
  c.track_train_accuracy = get(j, "track_train_accuracy", c.track_train_accuracy);
  c.stop_on_perfect_train = get(j, "stop_on_perfect_train", c.stop_on_perfect_train);
  c.eval_threads = get(j, "eval_threads", c.eval_threads);
  validate_train_config(c);
  return c;
}

std::string TrainReport::to_json(bool include_timing) const {
  json j;
  json ep = json::array();
  for (const auto& e : epochs) {
    json r = {{"epoch", e.epoch}, {"loss", e.loss}, {"val_oa", e.val_oa}};
    if (e.train_accuracy) r["train_accuracy"] = *e.train_accuracy;
    ep.push_back(r);
  }
  j["epochs"] = ep;
  j["selected_epoch"] = selected_epoch;
  j["best_val_oa"] = best_val_oa;
  j["stop_reason"] = stop_reason;
  j["seeds"] = {{"split", split_seed}, {"init", init_seed}, {"train", train_seed}};
  if (include_timing) j["wall_time_seconds"] = wall_time_seconds;
  if (test) j["test"] = metrics_json(*test);
  return j.dump(2);
}

std::string TrainReport::curves_csv() const {
  const bool acc = !epochs.empty() && epochs.front().train_accuracy.has_value();
  std::ostringstream os;
  os << "epoch,loss,val_oa" << (acc ? ",train_acc" : "") << '\n';
  for (const auto& e : epochs) {
    os << e.epoch << ',' << fmt("%.17g", e.loss) << ',' << fmt("%.17g", e.val_oa);
    if (acc) os << ',' << fmt("%.17g", e.train_accuracy.value_or(std::nan("")));
    os << '\n';
  }
  return os.str();
}

std::string AggregateReport::to_json(bool include_timing) const {
  json j;
  j["completed_runs"] = runs.size();
  j["single_run"] = single_run;
  j["oa"] = mean_std_json(oa);
  j["aa"] = mean_std_json(aa);
  j["kappa"] = mean_std_json(kappa);
  json pc = json::array();
  for (const auto& m : per_class) pc.push_back(mean_std_json(m));
  j["per_class"] = pc;
  json rs = json::array();
  for (const auto& r : runs) {
    json one = json::parse(r.report.to_json(include_timing));
    one["seed"] = r.seed;
    rs.push_back(one);
  }
  j["runs"] = rs;
  json fs = json::array();
  for (const auto& f : failures) fs.push_back({{"seed", f.seed}, {"error", f.message}});
  j["failures"] = fs;
  return j.dump(2);
}

std::string AggregateReport::format_table(const std::vector<std::string>& class_names) const {
  auto cell = [](const MeanStd& m) {
    return fmt("%.2f", m.mean * 100.0) + " ± " + fmt("%.2f", m.std * 100.0);
  };
  std::ostringstream os;
  char line[200];
  std::snprintf(line, sizeof(line), "%-6s %-32s %s\n", "Class", "Name", "Acc(%) mean ± std");
  os << line;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    const std::string name = c < class_names.size() ? class_names[c] : "";
    std::snprintf(line, sizeof(line), "%-6zu %-32s %s\n", c + 1, name.c_str(), cell(per_class[c]).c_str());
    os << line;
  }
  for (const auto& [label, m] : {std::pair{"OA", oa}, std::pair{"AA", aa}, std::pair{"Kappa", kappa}}) {
    std::snprintf(line, sizeof(line), "%-39s %s\n", label, cell(m).c_str());
    os << line;
  }
  os << "runs: " << runs.size();
  if (!failures.empty()) os << " (" << failures.size() << " failed)";
  if (single_run) os << " [single run: std reported as 0]";
  os << '\n';
  return os.str();
}

}  // namespace sehsn::train
