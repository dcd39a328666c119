#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sehsn {

struct SelfCheckOptions {
  std::uint64_t seed = 20240607;
  // Test fixture: corrupt the analytic backward of one layer kind
  // ("conv2d", "conv3d", "depthwise", "se", "dense") so the suite must
  // catch it.
  std::optional<std::string> inject_fault;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured error
  double tolerance = 0.0;
  std::string detail;
};

struct SelfCheckReport {
  std::vector<CheckResult> checks;
  double seconds = 0.0;
  bool passed() const;
  std::string format() const;  // one PASS/FAIL line per check
};

// Gradient checks for every layer and the whole tiny model, PCA against
// power iteration, metrics against brute-force marginals, reshape
// round-trips. All in 64-bit.
SelfCheckReport run_selfcheck(const SelfCheckOptions& options = {});

}  // namespace sehsn
