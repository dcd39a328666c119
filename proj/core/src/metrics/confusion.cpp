#include "sehsn/metrics/confusion.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sehsn/error.hpp"

namespace sehsn::metrics {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes) : k_(num_classes), cells_(num_classes * num_classes, 0) {
  if (num_classes == 0) throw ConfigError("ConfusionMatrix: need at least one class");
}

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes, std::vector<std::uint64_t> cells)
    : k_(num_classes), cells_(std::move(cells)) {
  if (num_classes == 0 || cells_.size() != num_classes * num_classes) {
    throw DataError("ConfusionMatrix: expected " + std::to_string(num_classes * num_classes) + " cells");
  }
}

void ConfusionMatrix::accumulate(std::size_t true_class, std::size_t predicted_class) {
  if (true_class < 1 || true_class > k_ || predicted_class < 1 || predicted_class > k_) {
    throw DataError("ConfusionMatrix: class pair (" + std::to_string(true_class) + ", " +
                    std::to_string(predicted_class) + ") outside 1.." + std::to_string(k_));
  }
  ++cells_[(true_class - 1) * k_ + predicted_class - 1];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw DataError("ConfusionMatrix: cannot merge matrices of different size");
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
}

std::uint64_t ConfusionMatrix::at(std::size_t t, std::size_t p) const { return cells_[(t - 1) * k_ + p - 1]; }

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (auto v : cells_) s += v;
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t c = 0; c < k_; ++c) s += cells_[c * k_ + c];
  return s;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t t) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < k_; ++p) s += cells_[(t - 1) * k_ + p];
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t p) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < k_; ++t) s += cells_[t * k_ + p - 1];
  return s;
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t n = cm.total();
  if (n == 0) throw DataError("overall_accuracy: empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(n);
}

std::vector<double> per_class_accuracy(const ConfusionMatrix& cm) {
  std::vector<double> out;
  for (std::size_t c = 1; c <= cm.num_classes(); ++c) {
    const std::uint64_t r = cm.row_sum(c);
    out.push_back(r == 0 ? std::numeric_limits<double>::quiet_NaN()
                         : static_cast<double>(cm.at(c, c)) / static_cast<double>(r));
  }
  return out;
}

double average_accuracy(const ConfusionMatrix& cm) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double a : per_class_accuracy(cm)) {
    if (std::isnan(a)) continue;
    sum += a;
    ++n;
  }
  if (n == 0) throw DataError("average_accuracy: no class has a true sample");
  return sum / static_cast<double>(n);
}

double kappa(const ConfusionMatrix& cm) {
  const std::uint64_t n = cm.total();
  if (n == 0) throw DataError("kappa: empty confusion matrix");
  const double total = static_cast<double>(n);
  const double po = static_cast<double>(cm.trace()) / total;
  // Integer marginal products keep pe exact until the final division.
  long double chance = 0;
  for (std::size_t c = 1; c <= cm.num_classes(); ++c) {
    chance += static_cast<long double>(cm.row_sum(c)) * static_cast<long double>(cm.col_sum(c));
  }
  const double pe = static_cast<double>(chance / (static_cast<long double>(total) * total));
  if (pe == 1.0) {
    if (po == 1.0) return 1.0;
    throw NumericalError("kappa: chance agreement is 1 with imperfect observed agreement");
  }
  return (po - pe) / (1.0 - pe);
}

MetricsReport make_report(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.oa = overall_accuracy(cm);
  r.aa = average_accuracy(cm);
  r.kappa = kappa(cm);
  r.per_class = per_class_accuracy(cm);
  r.confusion = cm;
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["oa"] = oa;
  j["aa"] = aa;
  j["kappa"] = kappa;
  nlohmann::json pc = nlohmann::json::array();
  for (double a : per_class) {
    if (std::isnan(a)) {
      pc.push_back(nullptr);
    } else {
      pc.push_back(a);
    }
  }
  j["per_class"] = pc;
  j["num_classes"] = confusion.num_classes();
  j["confusion"] = confusion.cells();
  return j.dump(2);
}

MetricsReport MetricsReport::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto k = j.at("num_classes").get<std::size_t>();
    MetricsReport r;
    r.confusion = ConfusionMatrix(k, j.at("confusion").get<std::vector<std::uint64_t>>());
    r.oa = j.at("oa").get<double>();
    r.aa = j.at("aa").get<double>();
    r.kappa = j.at("kappa").get<double>();
    for (const auto& v : j.at("per_class")) {
      r.per_class.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metrics report: ") + e.what());
  }
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream os;
  os << "true\\pred";
  for (std::size_t p = 1; p <= cm.num_classes(); ++p) os << ',' << p;
  os << '\n';
  for (std::size_t t = 1; t <= cm.num_classes(); ++t) {
    os << t;
    for (std::size_t p = 1; p <= cm.num_classes(); ++p) os << ',' << cm.at(t, p);
    os << '\n';
  }
  return os.str();
}

std::string percent(double fraction) {
  if (std::isnan(fraction)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

std::string format_table(const MetricsReport& report, const std::vector<std::string>& class_names) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-6s %-32s %8s\n", "Class", "Name", "Acc(%)");
  os << line;
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const std::string name = c < class_names.size() ? class_names[c] : "";
    std::snprintf(line, sizeof(line), "%-6zu %-32s %8s\n", c + 1, name.c_str(), percent(report.per_class[c]).c_str());
    os << line;
  }
  for (const auto& [label, value] : {std::pair{"OA", report.oa}, std::pair{"AA", report.aa},
                                     std::pair{"Kappa", report.kappa}}) {
    std::snprintf(line, sizeof(line), "%-39s %8s\n", label, percent(value).c_str());
    os << line;
  }
  return os.str();
}

}  // namespace sehsn::metrics
