#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sehsn/io/cube.hpp"

namespace sehsn::prep {

enum class Role : std::uint8_t { kTrain, kValidation, kTest };

char role_code(Role role);  // 'T', 'V', 'E'

// Per-class sample counts for one role. The total is
// floor(sum(totals) * fraction); classes get floor(total_c * fraction)
// plus one extra for the largest remainders (ties to the lower class
// index) until the total is met. Classes with at least min_total_for_one
// samples are then lifted to one, taking the slack back from the
// smallest-remainder bumps. Fractions are resolved to 1e-9.
std::vector<std::size_t> allocate_counts(std::span<const std::size_t> class_totals,
                                         double fraction, std::size_t min_total_for_one);

class SplitAssignment {
 public:
  std::uint64_t seed = 0;
  double train_fraction = 0.0;
  double val_fraction = 0.0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t num_classes = 0;
  // Labeled pixels in row-major order and their roles.
  std::vector<std::uint32_t> pixels;
  std::vector<Role> roles;
  // Classes with fewer than three samples (validation share forced to 0).
  std::vector<std::uint16_t> flagged_classes;

  std::vector<std::uint32_t> indices(Role role) const;
  std::size_t count(Role role) const;

  // JSON: {"seed","fractions":[train,val],"height","width","num_classes",
  // "labeled","assignments": run-length roles such as "3T2V41E"}
  std::string to_json() const;
  // Re-attaches roles to the labeled pixels of gt; throws if the
  // serialized split does not fit this ground truth.
  static SplitAssignment from_json(std::string_view text, const io::GroundTruthMap& gt);

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

SplitAssignment stratified_split(const io::GroundTruthMap& gt, std::size_t num_classes,
                                 double train_fraction, double val_fraction, std::uint64_t seed);

struct ClassCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  std::size_t total() const { return train + validation + test; }
};

// Index 0 unused; entries 1..K per class.
std::vector<ClassCounts> split_class_counts(const SplitAssignment& split, const io::GroundTruthMap& gt);

std::string run_length_encode(std::span<const Role> roles);
std::vector<Role> run_length_decode(std::string_view text);

}  // namespace sehsn::prep
