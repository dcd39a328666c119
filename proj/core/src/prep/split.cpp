#include "sehsn/prep/split.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "sehsn/error.hpp"
#include "sehsn/log.hpp"
#include "sehsn/random.hpp"

namespace sehsn::prep {
namespace {

constexpr std::uint64_t kFractionScale = 1'000'000'000ULL;

}  // namespace

char role_code(Role role) {
  switch (role) {
    case Role::kTrain: return 'T';
    case Role::kValidation: return 'V';
    case Role::kTest: return 'E';
  }
  return '?';
}

std::vector<std::size_t> allocate_counts(std::span<const std::size_t> class_totals,
                                         double fraction, std::size_t min_total_for_one) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("allocate_counts: fraction outside [0,1)");
  const auto scaled = static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(kFractionScale)));
  const std::size_t n = class_totals.size();

  std::vector<std::size_t> counts(n);
  std::vector<std::uint64_t> remainder(n);
  std::uint64_t numerator_sum = 0;
  std::size_t floor_sum = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const std::uint64_t q = class_totals[c] * scaled;
    counts[c] = q / kFractionScale;
    remainder[c] = q % kFractionScale;
    numerator_sum += q;
    floor_sum += counts[c];
  }
  const std::size_t target = numerator_sum / kFractionScale;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  std::vector<bool> bumped(n, false);
  for (std::size_t i = 0; floor_sum < target && i < n; ++i) {
    ++counts[order[i]];
    bumped[order[i]] = true;
    ++floor_sum;
  }

  std::size_t excess = 0;
  std::vector<bool> clamped(n, false);
  for (std::size_t c = 0; c < n; ++c) {
    if (counts[c] == 0 && class_totals[c] >= min_total_for_one && class_totals[c] > 0) {
      counts[c] = 1;
      clamped[c] = true;
      ++excess;
    }
  }
  // Give the slack back from the weakest remainder bumps.
  for (auto it = order.rbegin(); excess > 0 && it != order.rend(); ++it) {
    const std::size_t c = *it;
    if (bumped[c] && !clamped[c] && counts[c] > 1) {
      --counts[c];
      --excess;
    }
  }
  return counts;
}

std::vector<std::uint32_t> SplitAssignment::indices(Role role) const {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (roles[i] == role) out.push_back(pixels[i]);
  }
  return out;
}

std::size_t SplitAssignment::count(Role role) const {
  return static_cast<std::size_t>(std::count(roles.begin(), roles.end(), role));
}

std::string run_length_encode(std::span<const Role> roles) {
  std::string out;
  for (std::size_t i = 0; i < roles.size();) {
    std::size_t j = i;
    while (j < roles.size() && roles[j] == roles[i]) ++j;
    out += std::to_string(j - i);
    out += role_code(roles[i]);
    i = j;
  }
  return out;
}

std::vector<Role> run_length_decode(std::string_view text) {
  std::vector<Role> roles;
  std::size_t run = 0;
  bool have_digits = false;
  for (char ch : text) {
    if (ch >= '0' && ch <= '9') {
      run = run * 10 + static_cast<std::size_t>(ch - '0');
      have_digits = true;
      continue;
    }
    Role role;
    if (ch == 'T') {
      role = Role::kTrain;
    } else if (ch == 'V') {
      role = Role::kValidation;
    } else if (ch == 'E') {
      role = Role::kTest;
    } else {
      throw DataError(std::string("split JSON: unknown role code '") + ch + "'");
    }
    if (!have_digits || run == 0) throw DataError("split JSON: role code without a run length");
    roles.insert(roles.end(), run, role);
    run = 0;
    have_digits = false;
  }
  if (have_digits) throw DataError("split JSON: trailing run length without a role");
  return roles;
}

std::string SplitAssignment::to_json() const {
  nlohmann::json j = {{"seed", seed},
                      {"fractions", {train_fraction, val_fraction}},
                      {"height", height},
                      {"width", width},
                      {"num_classes", num_classes},
                      {"labeled", pixels.size()},
                      {"flagged_classes", flagged_classes},
                      {"assignments", run_length_encode(roles)}};
  return j.dump(2);
}

SplitAssignment SplitAssignment::from_json(std::string_view text, const io::GroundTruthMap& gt) {
  SplitAssignment s;
  std::string assignments;
  try {
    const auto j = nlohmann::json::parse(text);
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto fr = j.at("fractions").get<std::vector<double>>();
    if (fr.size() != 2) throw DataError("split JSON: fractions must have two entries");
    s.train_fraction = fr[0];
    s.val_fraction = fr[1];
    s.height = j.at("height").get<std::size_t>();
    s.width = j.at("width").get<std::size_t>();
    s.num_classes = j.at("num_classes").get<std::size_t>();
    s.flagged_classes = j.value("flagged_classes", std::vector<std::uint16_t>{});
    assignments = j.at("assignments").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("split JSON: ") + e.what());
  }
  if (s.height != gt.height() || s.width != gt.width()) {
    throw DataError("split JSON: extents do not match the ground truth");
  }
  s.roles = run_length_decode(assignments);
  for (std::size_t i = 0; i < gt.labels().size(); ++i) {
    if (gt.labels()[i] != 0) s.pixels.push_back(static_cast<std::uint32_t>(i));
  }
  if (s.roles.size() != s.pixels.size()) {
    throw DataError("split JSON: " + std::to_string(s.roles.size()) + " roles for " +
                    std::to_string(s.pixels.size()) + " labeled pixels");
  }
  return s;
}

SplitAssignment stratified_split(const io::GroundTruthMap& gt, std::size_t num_classes,
                                 double train_fraction, double val_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(val_fraction >= 0.0) || !(train_fraction + val_fraction < 1.0)) {
    throw ConfigError("stratified_split: need train_fraction > 0, val_fraction >= 0, sum < 1");
  }
  const auto totals = gt.class_totals(num_classes);
  const std::span<const std::size_t> per_class(totals.data() + 1, num_classes);

  auto train_counts = allocate_counts(per_class, train_fraction, 1);
  auto val_counts = allocate_counts(per_class, val_fraction, 3);

  SplitAssignment split;
  split.seed = seed;
  split.train_fraction = train_fraction;
  split.val_fraction = val_fraction;
  split.height = gt.height();
  split.width = gt.width();
  split.num_classes = num_classes;

  std::vector<std::vector<std::uint32_t>> members(num_classes + 1);
  for (std::size_t i = 0; i < gt.labels().size(); ++i) {
    const auto l = gt.labels()[i];
    if (l == 0) continue;
    split.pixels.push_back(static_cast<std::uint32_t>(i));
    members[l].push_back(static_cast<std::uint32_t>(i));
  }

  std::vector<Role> role_of(gt.labels().size(), Role::kTest);
  for (std::size_t c = 1; c <= num_classes; ++c) {
    const std::size_t total = per_class[c - 1];
    if (total == 0) continue;
    std::size_t n_train = train_counts[c - 1];
    std::size_t n_val = val_counts[c - 1];
    if (total < 3) {
      n_train = 1;
      n_val = 0;
      split.flagged_classes.push_back(static_cast<std::uint16_t>(c));
      warn("stratified_split: class " + std::to_string(c) + " has only " + std::to_string(total) +
           " samples; using 1 train, 0 validation");
    }
    n_val = std::min(n_val, total - n_train);

    Pcg32 rng(mix_seed(seed, c));
    auto& pool = members[c];
    shuffle(std::span<std::uint32_t>(pool), rng);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      role_of[pool[i]] = i < n_train ? Role::kTrain : (i < n_train + n_val ? Role::kValidation : Role::kTest);
    }
  }
  split.roles.reserve(split.pixels.size());
  for (auto p : split.pixels) split.roles.push_back(role_of[p]);
  return split;
}

std::vector<ClassCounts> split_class_counts(const SplitAssignment& split, const io::GroundTruthMap& gt) {
  std::vector<ClassCounts> counts(split.num_classes + 1);
  for (std::size_t i = 0; i < split.pixels.size(); ++i) {
    const auto l = gt.labels()[split.pixels[i]];
    if (l == 0 || l > split.num_classes) throw DataError("split refers to an unlabeled pixel");
    switch (split.roles[i]) {
      case Role::kTrain: ++counts[l].train; break;
      case Role::kValidation: ++counts[l].validation; break;
      case Role::kTest: ++counts[l].test; break;
    }
  }
  return counts;
}

}  // namespace sehsn::prep
