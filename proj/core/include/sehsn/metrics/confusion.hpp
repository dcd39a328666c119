#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sehsn::metrics {

// K x K counts, rows = true class, columns = predicted class. The public
// interface speaks 1-based class ids.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes);
  ConfusionMatrix(std::size_t num_classes, std::vector<std::uint64_t> cells);

  std::size_t num_classes() const { return k_; }
  void accumulate(std::size_t true_class, std::size_t predicted_class);
  // Cell-wise sum; both matrices must have the same K.
  void merge(const ConfusionMatrix& other);

  std::uint64_t at(std::size_t true_class, std::size_t predicted_class) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t true_class) const;
  std::uint64_t col_sum(std::size_t predicted_class) const;
  const std::vector<std::uint64_t>& cells() const { return cells_; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_;
  std::vector<std::uint64_t> cells_;
};

double overall_accuracy(const ConfusionMatrix& cm);
double average_accuracy(const ConfusionMatrix& cm);
double kappa(const ConfusionMatrix& cm);
// Recall per class; NaN for classes without true samples.
std::vector<double> per_class_accuracy(const ConfusionMatrix& cm);

struct MetricsReport {
  double oa = 0.0;
  double aa = 0.0;
  double kappa = 0.0;
  std::vector<double> per_class;  // index 0 = class 1
  ConfusionMatrix confusion{1};

  std::string to_json() const;
  static MetricsReport from_json(std::string_view text);
};

MetricsReport make_report(const ConfusionMatrix& cm);

// "true\\pred,1,2,...\n1,a,b,...\n"
std::string confusion_csv(const ConfusionMatrix& cm);

// Per-class rows then OA, AA, Kappa; percentages (kappa x 100) with two
// decimals.
std::string format_table(const MetricsReport& report, const std::vector<std::string>& class_names = {});

// Two-decimal percentage, e.g. 0.96764 -> "96.76".
std::string percent(double fraction);

}  // namespace sehsn::metrics
