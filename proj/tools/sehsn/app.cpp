#include "app.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <toml.hpp>

#include "sehsn/error.hpp"
#include "sehsn/io/class_map.hpp"
#include "sehsn/io/envi.hpp"
#include "sehsn/io/manifest.hpp"
#include "sehsn/io/raw.hpp"
#include "sehsn/log.hpp"
#include "sehsn/metrics/confusion.hpp"
#include "sehsn/model/checkpoint.hpp"
#include "sehsn/model/predict.hpp"
#include "sehsn/prep/pca.hpp"
#include "sehsn/prep/split.hpp"
#include "sehsn/prep/standardize.hpp"
#include "sehsn/selfcheck.hpp"
#include "sehsn/train/repeated.hpp"

namespace sehsn::app {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json toml_to_json(const toml::table& t) {
  std::ostringstream os;
  os << toml::json_formatter{t};
  return json::parse(os.str());
}

toml::table json_to_toml(const json& j);

toml::array json_array_to_toml(const json& j) {
  toml::array a;
  for (const auto& e : j) {
    if (e.is_object()) {
      a.push_back(json_to_toml(e));
    } else if (e.is_array()) {
      a.push_back(json_array_to_toml(e));
    } else if (e.is_boolean()) {
      a.push_back(e.get<bool>());
    } else if (e.is_number_integer()) {
      a.push_back(e.get<std::int64_t>());
    } else if (e.is_number()) {
      a.push_back(e.get<double>());
    } else {
      a.push_back(e.get<std::string>());
    }
  }
  return a;
}

toml::table json_to_toml(const json& j) {
  toml::table t;
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) {
      t.insert(k, json_to_toml(v));
    } else if (v.is_array()) {
      t.insert(k, json_array_to_toml(v));
    } else if (v.is_boolean()) {
      t.insert(k, v.get<bool>());
    } else if (v.is_number_integer()) {
      t.insert(k, v.get<std::int64_t>());
    } else if (v.is_number()) {
      t.insert(k, v.get<double>());
    } else if (v.is_string()) {
      t.insert(k, v.get<std::string>());
    }
  }
  return t;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, _] : j.items()) {
    if (!known.count(k)) throw ConfigError("config: unknown key '" + k + "' in " + where);
  }
}

template <typename U>
U take(const json& j, const char* key, U fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<U>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: field '") + key + "': " + e.what());
  }
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create directory " + p.string() + ": " + ec.message());
}

void write_text(const fs::path& p, const std::string& text) { io::write_text_file(p, text); }

void require_paths(const RunConfig& cfg) {
  if (cfg.manifest.empty()) throw ConfigError("config: no manifest given (config key 'manifest' or --manifest)");
  if (cfg.out.empty()) throw ConfigError("config: no output directory given (config key 'out' or --out)");
}

struct Prepared {
  io::DatasetManifest manifest;
  io::HyperspectralCube cube;  // PCA-reduced
  io::GroundTruthMap gt;
  prep::SplitAssignment split;
};

Prepared load_prepared(const RunConfig& cfg) {
  require_paths(cfg);
  const PreparedPaths p(cfg.out);
  if (!fs::exists(p.meta)) {
    throw DataError("no prepared artifacts in " + p.dir.string() + "; run 'sehsn prepare' first");
  }
  Prepared r;
  r.manifest = io::load_manifest(cfg.manifest);
  const json meta = json::parse(io::read_text_file(p.meta));
  const auto layout = io::parse_raw_sidecar(io::read_text_file(p.cube_sidecar));
  r.cube = io::load_raw_cube(p.cube, layout);
  r.gt = io::load_ground_truth(p.ground_truth, r.cube.height(), r.cube.width(), r.manifest.num_classes());
  if (meta.at("pca_k").get<std::size_t>() != cfg.pca_k) {
    throw ConfigError("prepared artifacts use pca_k " + meta.at("pca_k").dump() + " but the config asks for " +
                      std::to_string(cfg.pca_k) + "; rerun 'sehsn prepare'");
  }
  r.split = prep::SplitAssignment::from_json(io::read_text_file(p.split), r.gt);
  return r;
}

std::vector<std::string> class_names(const io::DatasetManifest& m) { return m.class_names; }

std::string counts_table(const std::vector<prep::ClassCounts>& counts, const std::vector<std::string>& names) {
  std::ostringstream os;
  char line[200];
  std::snprintf(line, sizeof(line), "%-4s %-32s %8s %10s %8s %8s\n", "No.", "Class", "Training", "Validation",
                "Testing", "Total");
  os << line;
  prep::ClassCounts total;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    const auto& k = counts[c];
    std::snprintf(line, sizeof(line), "%-4zu %-32s %8zu %10zu %8zu %8zu\n", c,
                  c - 1 < names.size() ? names[c - 1].c_str() : "", k.train, k.validation, k.test, k.total());
    os << line;
    total.train += k.train;
    total.validation += k.validation;
    total.test += k.test;
  }
  std::snprintf(line, sizeof(line), "%-37s %8zu %10zu %8zu %8zu\n", "Total", total.train, total.validation,
                total.test, total.total());
  os << line;
  return os.str();
}

std::string counts_csv(const std::vector<prep::ClassCounts>& counts) {
  std::ostringstream os;
  os << "class,train,validation,test,total\n";
  for (std::size_t c = 1; c < counts.size(); ++c) {
    os << c << ',' << counts[c].train << ',' << counts[c].validation << ',' << counts[c].test << ','
       << counts[c].total() << '\n';
  }
  return os.str();
}

// The checkpoint's run directory may carry the split it was trained on.
prep::SplitAssignment split_for_checkpoint(const fs::path& checkpoint, const Prepared& p) {
  const fs::path beside = checkpoint.parent_path() / "split.json";
  if (fs::exists(beside)) return prep::SplitAssignment::from_json(io::read_text_file(beside), p.gt);
  return p.split;
}

fs::path default_checkpoint(const RunConfig& cfg) { return cfg.out / "train" / "run_0" / "checkpoint.bin"; }

template <typename T>
model::Network<T> load_model_for(const fs::path& checkpoint, const Prepared& p) {
  model::Network<T> net = model::load_checkpoint<T>(checkpoint);
  const auto& mc = net.config();
  if (mc.pca_k != p.cube.bands() || mc.num_classes != p.manifest.num_classes()) {
    throw ConfigError("checkpoint/config mismatch: checkpoint expects pca_k " + std::to_string(mc.pca_k) + " and " +
                      std::to_string(mc.num_classes) + " classes, prepared data has " +
                      std::to_string(p.cube.bands()) + " components and " +
                      std::to_string(p.manifest.num_classes()) + " classes");
  }
  return net;
}

template <typename T>
int eval_impl(const RunConfig& cfg, const fs::path& checkpoint, std::ostream& out) {
  const Prepared p = load_prepared(cfg);
  const model::Network<T> net = load_model_for<T>(checkpoint, p);
  const prep::SplitAssignment split = split_for_checkpoint(checkpoint, p);
  const auto report = train::evaluate(net, p.cube, p.gt, split, prep::Role::kTest, {128, cfg.threads});
  const fs::path dir = cfg.out / "eval";
  ensure_dir(dir);
  const std::string table = metrics::format_table(report, class_names(p.manifest));
  write_text(dir / "metrics.json", report.to_json());
  write_text(dir / "confusion.csv", metrics::confusion_csv(report.confusion));
  write_text(dir / "table.txt", table);
  out << table;
  return 0;
}

template <typename T>
int map_impl(const RunConfig& cfg, const fs::path& checkpoint, bool all_pixels, std::ostream& out) {
  const Prepared p = load_prepared(cfg);
  const model::Network<T> net = load_model_for<T>(checkpoint, p);
  const io::GroundTruthMap pred = model::predict_scene(net, p.cube, p.gt, all_pixels, {128, cfg.threads});
  const fs::path dir = cfg.out / "map";
  ensure_dir(dir);
  io::render_class_map(pred, p.manifest.palette, dir / "prediction.ppm");
  io::render_class_map(p.gt, p.manifest.palette, dir / "ground_truth.ppm");
  out << "wrote " << (dir / "prediction.ppm").string() << " (" << pred.height() << "x" << pred.width() << ")\n";
  return 0;
}

}  // namespace

PreparedPaths::PreparedPaths(const fs::path& out)
    : dir(out / "prepared"),
      cube(dir / "cube_pca.f64"),
      cube_sidecar(dir / "cube_pca.json"),
      ground_truth(dir / "ground_truth.u16"),
      pca(dir / "pca.json"),
      split(dir / "split.json"),
      counts_csv(dir / "class_counts.csv"),
      summary(dir / "summary.txt"),
      meta(dir / "meta.json") {}

RunConfig resolve_config(const Overrides& ov) {
  RunConfig cfg;
  json file = json::object();
  fs::path base = fs::current_path();
  if (ov.config) {
    try {
      file = toml_to_json(toml::parse_file(ov.config->string()));
    } catch (const toml::parse_error& e) {
      const auto& b = e.source().begin;
      throw ConfigError(ov.config->string() + ":" + std::to_string(b.line) + ":" + std::to_string(b.column) + ": " +
                        std::string(e.description()));
    }
    base = ov.config->parent_path();
  }
  reject_unknown(file, {"manifest", "out", "seed", "threads", "precision", "preprocess", "model", "train"},
                 "top level");
  if (file.contains("manifest")) {
    fs::path m = take<std::string>(file, "manifest", "");
    cfg.manifest = m.is_relative() ? base / m : m;
  }
  if (file.contains("out")) cfg.out = take<std::string>(file, "out", "");
  cfg.seed = take<std::uint64_t>(file, "seed", cfg.seed);
  std::size_t threads = take<std::size_t>(file, "threads", 0);
  cfg.precision = take<std::string>(file, "precision", cfg.precision);
  if (cfg.precision != "f32" && cfg.precision != "f64") throw ConfigError("config: precision must be f32 or f64");

  const json pre = file.value("preprocess", json::object());
  reject_unknown(pre, {"window", "pca_k", "train_fraction", "val_fraction"}, "[preprocess]");
  cfg.window = take<std::size_t>(pre, "window", cfg.window);
  cfg.pca_k = take<std::size_t>(pre, "pca_k", cfg.pca_k);

  if (ov.manifest) cfg.manifest = *ov.manifest;
  if (ov.out) cfg.out = *ov.out;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.threads) threads = *ov.threads;
  cfg.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;

  // Class count and default fractions come from the manifest.
  std::size_t num_classes = 16;
  std::optional<double> mtrain, mval;
  if (!cfg.manifest.empty()) {
    const io::DatasetManifest m = io::load_manifest(cfg.manifest);
    num_classes = m.num_classes();
    mtrain = m.train_fraction;
    mval = m.val_fraction;
  }
  cfg.train_fraction = take<double>(pre, "train_fraction", mtrain.value_or(cfg.train_fraction));
  cfg.val_fraction = take<double>(pre, "val_fraction", mval.value_or(cfg.val_fraction));

  json mj = file.value("model", json::object());
  for (const auto& [key, value] : {std::pair<const char*, std::size_t>{"window", cfg.window},
                                   {"pca_k", cfg.pca_k}, {"num_classes", num_classes}}) {
    if (mj.contains(key) && mj.at(key) != value) {
      throw ConfigError(std::string("config: [model].") + key + " conflicts with the preprocessing/manifest value " +
                        std::to_string(value));
    }
    mj[key] = value;
  }
  if (!mj.contains("seed")) mj["seed"] = cfg.seed;
  if (ov.seed) mj["seed"] = cfg.seed;
  cfg.model = model::config_from_json(mj.dump());

  json tj = file.value("train", json::object());
  if (!tj.contains("seed") || ov.seed) tj["seed"] = cfg.seed;
  if (ov.repeats) tj["repeats"] = *ov.repeats;
  tj["eval_threads"] = cfg.threads;
  cfg.train = train::train_config_from_json(tj.dump());
  return cfg;
}

std::string format_config_toml(const RunConfig& cfg) {
  json j;
  j["manifest"] = cfg.manifest.string();
  j["out"] = cfg.out.string();
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["precision"] = cfg.precision;
  j["preprocess"] = {{"window", cfg.window},
                     {"pca_k", cfg.pca_k},
                     {"train_fraction", cfg.train_fraction},
                     {"val_fraction", cfg.val_fraction}};
  j["model"] = json::parse(model::config_to_json(cfg.model));
  j["train"] = json::parse(train::train_config_to_json(cfg.train));
  std::ostringstream os;
  os << json_to_toml(j) << '\n';
  return os.str();
}

int cmd_prepare(const RunConfig& cfg, std::ostream& out) {
  require_paths(cfg);
  const io::DatasetManifest m = io::load_manifest(cfg.manifest);
  io::HyperspectralCube cube = io::load_cube(m);
  const io::GroundTruthMap gt = io::load_ground_truth(m, cube.height(), cube.width());
  if (!m.expected_class_totals.empty()) {
    const auto totals = gt.class_totals(m.num_classes());
    for (std::size_t c = 1; c <= m.num_classes(); ++c) {
      if (totals[c] != m.expected_class_totals[c - 1]) {
        throw DataError(m.ground_truth_path.string() + ": class " + std::to_string(c) + " has " +
                        std::to_string(totals[c]) + " labeled pixels, manifest expects " +
                        std::to_string(m.expected_class_totals[c - 1]));
      }
    }
  }
  cube = io::discard_bands(cube, m.bands_to_discard);
  const io::HyperspectralCube standardized = prep::standardize_bands(cube);
  const prep::PcaModel pca = prep::fit_pca(standardized, cfg.pca_k);
  const io::HyperspectralCube reduced = prep::apply_pca(standardized, pca);
  const prep::SplitAssignment split =
      prep::stratified_split(gt, m.num_classes(), cfg.train_fraction, cfg.val_fraction, cfg.seed);
  const auto counts = prep::split_class_counts(split, gt);

  const PreparedPaths p(cfg.out);
  ensure_dir(p.dir);
  io::RasterLayout layout;
  layout.lines = reduced.height();
  layout.samples = reduced.width();
  layout.bands = reduced.bands();
  layout.type = io::SampleType::kF64;
  layout.interleave = io::Interleave::kBip;
  io::save_raw_cube(reduced, p.cube, layout);
  write_text(p.cube_sidecar, io::format_raw_sidecar(layout));
  io::save_ground_truth(gt, p.ground_truth);
  write_text(p.pca, pca.to_json());
  write_text(p.split, split.to_json());
  write_text(p.counts_csv, counts_csv(counts));
  const std::string table = counts_table(counts, m.class_names);
  write_text(p.summary, table);
  json meta = {{"dataset", m.name},
               {"height", reduced.height()},
               {"width", reduced.width()},
               {"bands_after_discard", cube.bands()},
               {"pca_k", cfg.pca_k},
               {"num_classes", m.num_classes()},
               {"seed", cfg.seed},
               {"fractions", {cfg.train_fraction, cfg.val_fraction}}};
  write_text(p.meta, meta.dump(2));
  write_text(p.dir / "resolved_config.toml", format_config_toml(cfg));
  out << m.name << ": " << cube.bands() << " bands kept, " << cfg.pca_k << " principal components\n" << table;
  return 0;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  const Prepared p = load_prepared(cfg);
  const fs::path dir = cfg.out / "train";
  ensure_dir(dir);
  write_text(dir / "resolved_config.toml", format_config_toml(cfg));
  train::RepeatedSetup setup;
  setup.cube = &p.cube;
  setup.gt = &p.gt;
  setup.train_fraction = cfg.train_fraction;
  setup.val_fraction = cfg.val_fraction;
  setup.model = cfg.model;
  setup.train = cfg.train;
  setup.use_double = cfg.precision == "f64";
  std::uint64_t current = cfg.seed;
  train::TrainHooks hooks;
  hooks.on_epoch = [&](const train::EpochRecord& e) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "seed %llu epoch %3zu  loss %.5f  val OA %s%%\n",
                  static_cast<unsigned long long>(current), e.epoch, e.loss, metrics::percent(e.val_oa).c_str());
    out << buf << std::flush;
  };
  auto on_run = [&](const train::RunArtifacts& a) {
    const fs::path run = dir / ("run_" + std::to_string(a.seed - cfg.seed));
    ensure_dir(run);
    io::write_file_bytes(run / "checkpoint.bin", std::as_bytes(std::span<const std::uint8_t>(*a.checkpoint)));
    write_text(run / "split.json", a.split->to_json());
    write_text(run / "train_report.json", a.report->to_json());
    write_text(run / "curves.csv", a.report->curves_csv());
    write_text(run / "metrics.json", a.report->test->to_json());
    write_text(run / "confusion.csv", metrics::confusion_csv(a.report->test->confusion));
    current = a.seed + 1;
  };
  const train::AggregateReport agg = train::run_repeated(setup, cfg.seed, on_run, hooks);
  write_text(dir / "aggregate_report.json", agg.to_json());
  const std::string table = agg.format_table(class_names(p.manifest));
  write_text(dir / "summary.txt", table);
  out << table;
  return 0;
}

int cmd_eval(const RunConfig& cfg, const fs::path& checkpoint, std::ostream& out) {
  const fs::path ck = checkpoint.empty() ? default_checkpoint(cfg) : checkpoint;
  return cfg.precision == "f64" ? eval_impl<double>(cfg, ck, out) : eval_impl<float>(cfg, ck, out);
}

int cmd_map(const RunConfig& cfg, const fs::path& checkpoint, bool all_pixels, std::ostream& out) {
  const fs::path ck = checkpoint.empty() ? default_checkpoint(cfg) : checkpoint;
  return cfg.precision == "f64" ? map_impl<double>(cfg, ck, all_pixels, out)
                                : map_impl<float>(cfg, ck, all_pixels, out);
}

int cmd_selfcheck(const std::optional<std::string>& fault, std::ostream& out) {
  SelfCheckOptions o;
  o.inject_fault = fault;
  const SelfCheckReport r = run_selfcheck(o);
  out << r.format();
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f s\n", r.seconds);
  out << buf;
  return r.passed() ? 0 : 3;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SE-HybridSN hyperspectral classification", "sehsn"};
  app.require_subcommand(1);
  Overrides ov;
  std::string config, outdir, manifest, checkpoint, fault;
  std::uint64_t seed = 0;
  std::size_t threads = 0, repeats = 0;
  bool print_config = false, all_pixels = false;

  auto shared = [&](CLI::App* sub) {
    sub->add_option("--config", config, "TOML run configuration");
    sub->add_option("--out", outdir, "output directory (every file is written below it)");
    sub->add_option("--manifest", manifest, "dataset manifest (overrides the config)");
    sub->add_option("--seed", seed, "base seed for split, initialization, shuffling and dropout");
    sub->add_option("--threads", threads, "inference threads (0 = all cores)");
    sub->add_option("--repeats", repeats, "independent runs to aggregate");
    sub->add_flag("--print-config", print_config, "print the resolved configuration and exit");
  };
  CLI::App* prepare = app.add_subcommand("prepare", "discard bands, standardize, PCA, split");
  CLI::App* trn = app.add_subcommand("train", "train (repeated) models on prepared data");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test pixels");
  CLI::App* map = app.add_subcommand("map", "render a classification map");
  CLI::App* self = app.add_subcommand("selfcheck", "gradient, PCA, metrics and reshape checks");
  for (CLI::App* s : {prepare, trn, eval, map, self}) shared(s);
  for (CLI::App* s : {eval, map}) s->add_option("--checkpoint", checkpoint, "checkpoint file");
  map->add_flag("--all-pixels", all_pixels, "classify background pixels too");
  self->add_option("--inject-fault", fault)->group("");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 1;
  }

  auto given = [](CLI::App* s, const char* name) {
    const CLI::Option* o = s->get_option_no_throw(name);
    return o && o->count() > 0;
  };
  CLI::App* sub = app.get_subcommands().front();
  if (given(sub, "--config")) ov.config = config;
  if (given(sub, "--out")) ov.out = outdir;
  if (given(sub, "--manifest")) ov.manifest = manifest;
  if (given(sub, "--seed")) ov.seed = seed;
  if (given(sub, "--threads")) ov.threads = threads;
  if (given(sub, "--repeats")) ov.repeats = repeats;

  try {
    set_warning_sink([&err](const std::string& m) { err << "warning: " << m << '\n'; });
    if (sub == self && !print_config) {
      const int rc = cmd_selfcheck(fault.empty() ? std::nullopt : std::optional<std::string>(fault), out);
      set_warning_sink({});
      return rc;
    }
    RunConfig cfg = resolve_config(ov);
    if (print_config) {
      out << format_config_toml(cfg);
      set_warning_sink({});
      return 0;
    }
    int rc = 0;
    if (sub == prepare) rc = cmd_prepare(cfg, out);
    if (sub == trn) rc = cmd_train(cfg, out);
    if (sub == eval) rc = cmd_eval(cfg, checkpoint, out);
    if (sub == map) rc = cmd_map(cfg, checkpoint, all_pixels, out);
    set_warning_sink({});
    return rc;
  } catch (const ConfigError& e) {
    set_warning_sink({});
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    set_warning_sink({});
    err << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    set_warning_sink({});
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    set_warning_sink({});
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace sehsn::app
