#include "sehsn/train/repeated.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "sehsn/error.hpp"
#include "sehsn/log.hpp"
#include "sehsn/model/checkpoint.hpp"
#include "sehsn/model/network.hpp"
#include "sehsn/prep/split.hpp"

namespace sehsn::train {

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd r;
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return r;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return r;
}

AggregateReport aggregate(std::vector<RunRecord> runs, std::vector<RunFailure> failures) {
  AggregateReport agg;
  agg.runs = std::move(runs);
  agg.failures = std::move(failures);
  agg.single_run = agg.runs.size() < 2;
  std::vector<double> oa, aa, kappa;
  std::vector<std::vector<double>> per_class;
  for (const auto& r : agg.runs) {
    if (!r.report.test) throw DataError("aggregate: run without test metrics");
    const auto& t = *r.report.test;
    oa.push_back(t.oa);
    aa.push_back(t.aa);
    kappa.push_back(t.kappa);
    if (per_class.size() < t.per_class.size()) per_class.resize(t.per_class.size());
    for (std::size_t c = 0; c < t.per_class.size(); ++c) {
      if (!std::isnan(t.per_class[c])) per_class[c].push_back(t.per_class[c]);
    }
  }
  agg.oa = mean_std(oa);
  agg.aa = mean_std(aa);
  agg.kappa = mean_std(kappa);
  for (const auto& v : per_class) agg.per_class.push_back(mean_std(v));
  return agg;
}

namespace {

template <typename T>
RunRecord one_run(const RepeatedSetup& s, std::uint64_t seed, std::uint64_t split_seed,
                  const std::function<void(const RunArtifacts&)>& on_run, const TrainHooks& hooks) {
  const std::size_t k = s.model.num_classes;
  const prep::SplitAssignment split =
      prep::stratified_split(*s.gt, k, s.train_fraction, s.val_fraction, split_seed);
  model::ModelConfig mc = s.model;
  mc.seed = seed;
  TrainConfig tc = s.train;
  tc.seed = seed;
  model::Network<T> net(mc);
  RunRecord rec;
  rec.seed = seed;
  rec.report = train_network(net, *s.cube, *s.gt, split, tc, hooks);
  rec.report.test = evaluate(net, *s.cube, *s.gt, split, prep::Role::kTest, {128, tc.eval_threads});
  if (on_run) {
    const std::vector<std::uint8_t> ckpt = model::encode_checkpoint(net);
    on_run(RunArtifacts{seed, &split, &ckpt, &rec.report});
  }
  return rec;
}

}  // namespace

AggregateReport run_repeated(const RepeatedSetup& setup, std::uint64_t base_seed,
                             const std::function<void(const RunArtifacts&)>& on_run, const TrainHooks& hooks) {
  if (!setup.cube || !setup.gt) throw ConfigError("run_repeated: cube and ground truth are required");
  validate_train_config(setup.train);
  std::vector<RunRecord> runs;
  std::vector<RunFailure> failures;
  std::exception_ptr last;
  for (std::size_t i = 0; i < setup.train.repeats; ++i) {
    const std::uint64_t seed = base_seed + i;
    const std::uint64_t split_seed = setup.train.resplit_per_repeat ? seed : base_seed;
    try {
      runs.push_back(setup.use_double ? one_run<double>(setup, seed, split_seed, on_run, hooks)
                                      : one_run<float>(setup, seed, split_seed, on_run, hooks));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      last = std::current_exception();
      failures.push_back({seed, e.what()});
      warn("run with seed " + std::to_string(seed) + " failed: " + e.what());
    }
  }
  if (runs.empty() && last) std::rethrow_exception(last);
  if (!failures.empty()) {
    warn("aggregating over " + std::to_string(runs.size()) + " of " + std::to_string(setup.train.repeats) +
         " runs");
  }
  AggregateReport agg = aggregate(std::move(runs), std::move(failures));
  if (agg.single_run) warn("only one run completed; standard deviations are reported as 0");
  return agg;
}

}  // namespace sehsn::train
