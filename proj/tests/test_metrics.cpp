#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sehsn/error.hpp"
#include "sehsn/metrics/confusion.hpp"
#include "sehsn/random.hpp"
#include "support/oracles.hpp"
#include "support/tables.hpp"

using namespace sehsn;
using namespace sehsn::metrics;

namespace {

ConfusionMatrix matrix(std::size_t k, std::vector<std::uint64_t> cells) { return ConfusionMatrix(k, std::move(cells)); }

std::vector<std::vector<std::uint64_t>> rows(const ConfusionMatrix& cm) {
  const std::size_t k = cm.num_classes();
  std::vector<std::vector<std::uint64_t>> r(k, std::vector<std::uint64_t>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) r[i][j] = cm.at(i + 1, j + 1);
  return r;
}

ConfusionMatrix random_matrix(Pcg32& rng, std::size_t k) {
  std::vector<std::uint64_t> cells(k * k);
  for (auto& c : cells) c = rng.bounded(50);
  cells[0] += 1;  // never empty
  return ConfusionMatrix(k, cells);
}

}  // namespace

TEST_CASE("accumulate") {
  SUBCASE("one correct sample") {
    ConfusionMatrix cm(3);
    cm.accumulate(2, 2);
    CHECK(cm.trace() == 1);
    CHECK(cm.total() == 1);
  }
  SUBCASE("stream (1,1),(1,2),(2,2)") {
    ConfusionMatrix cm(2);
    cm.accumulate(1, 1);
    cm.accumulate(1, 2);
    cm.accumulate(2, 2);
    CHECK(cm == matrix(2, {1, 1, 0, 1}));
  }
  SUBCASE("order does not matter") {
    Pcg32 rng(1);
    std::vector<std::pair<std::size_t, std::size_t>> stream;
    for (int i = 0; i < 300; ++i) stream.emplace_back(1 + rng.bounded(5), 1 + rng.bounded(5));
    ConfusionMatrix a(5), b(5);
    for (auto [t, p] : stream) a.accumulate(t, p);
    shuffle(std::span(stream), rng);
    for (auto [t, p] : stream) b.accumulate(t, p);
    CHECK(a == b);
  }
  SUBCASE("out of range") {
    ConfusionMatrix cm(2);
    CHECK_THROWS_AS(cm.accumulate(0, 1), DataError);
    CHECK_THROWS_AS(cm.accumulate(1, 3), DataError);
  }
  SUBCASE("merge adds cells") {
    ConfusionMatrix a = matrix(2, {1, 2, 3, 4});
    a.merge(matrix(2, {1, 1, 1, 1}));
    CHECK(a == matrix(2, {2, 3, 4, 5}));
    CHECK_THROWS(a.merge(ConfusionMatrix(3)));
  }
}

TEST_CASE("overall accuracy") {
  CHECK(overall_accuracy(matrix(3, {4, 0, 0, 0, 2, 0, 0, 0, 9})) == 1.0);
  CHECK(overall_accuracy(matrix(2, {1, 1, 1, 1})) == 0.5);
  CHECK_THROWS(overall_accuracy(ConfusionMatrix(2)));
}

TEST_CASE("average accuracy") {
  CHECK(average_accuracy(matrix(2, {2, 0, 0, 2})) == 1.0);
  CHECK(average_accuracy(matrix(2, {1, 1, 0, 2})) == 0.75);
  CHECK(average_accuracy(matrix(2, {3, 1, 0, 0})) == 0.75);
  CHECK_THROWS(average_accuracy(ConfusionMatrix(2)));
  const auto pc = per_class_accuracy(matrix(2, {3, 1, 0, 0}));
  CHECK(pc[0] == 0.75);
  CHECK(std::isnan(pc[1]));
}

TEST_CASE("kappa") {
  CHECK(kappa(matrix(2, {5, 0, 0, 3})) == 1.0);
  CHECK(kappa(matrix(2, {1, 1, 1, 1})) == 0.0);
  // all mass in one cell: p_e = 1
  CHECK(kappa(matrix(2, {4, 0, 0, 0})) == 1.0);
  CHECK(kappa(matrix(2, {0, 4, 0, 0})) == 0.0);
  CHECK_THROWS(kappa(ConfusionMatrix(2)));
}

TEST_CASE("kappa matches marginal enumeration on 100 random matrices") {
  Pcg32 rng(2);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const ConfusionMatrix cm = random_matrix(rng, 4);
    worst = std::max(worst, std::abs(kappa(cm) - oracle::kappa_by_enumeration(rows(cm))));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("invariants") {
  Pcg32 rng(3);
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 2 + rng.bounded(6);
    const ConfusionMatrix cm = random_matrix(rng, k);
    CHECK(kappa(cm) <= 1.0);

    // consistent relabeling
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(std::span(perm), rng);
    std::vector<std::uint64_t> permuted(k * k), scaled(k * k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        permuted[perm[i] * k + perm[j]] = cm.at(i + 1, j + 1);
        scaled[i * k + j] = 7 * cm.at(i + 1, j + 1);
      }
    for (const ConfusionMatrix& other : {ConfusionMatrix(k, permuted), ConfusionMatrix(k, scaled)}) {
      CHECK(overall_accuracy(other) == doctest::Approx(overall_accuracy(cm)).epsilon(1e-14));
      CHECK(average_accuracy(other) == doctest::Approx(average_accuracy(cm)).epsilon(1e-14));
      CHECK(kappa(other) == doctest::Approx(kappa(cm)).epsilon(1e-12));
    }
  }
  // kappa == 1 exactly for diagonal matrices, below 1 otherwise
  CHECK(kappa(matrix(3, {1, 0, 0, 0, 5, 0, 0, 0, 2})) == 1.0);
  CHECK(kappa(matrix(3, {1, 0, 0, 0, 5, 1, 0, 0, 2})) < 1.0);
}

TEST_CASE("perfect predictor and constant predictor on the Indian Pines test split") {
  const std::size_t k = tables::kIndianPines.size();
  ConfusionMatrix perfect(k), constant(k);
  std::size_t largest = 0, total = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t n = tables::kIndianPines[c].test;
    for (std::size_t i = 0; i < n; ++i) {
      perfect.accumulate(c + 1, c + 1);
      constant.accumulate(c + 1, 11);
    }
    largest = std::max(largest, n);
    total += n;
  }
  const MetricsReport p = make_report(perfect);
  CHECK(p.oa == 1.0);
  CHECK(p.aa == 1.0);
  CHECK(p.kappa == 1.0);
  CHECK(p.per_class.size() == 16);
  CHECK(total == 9225);
  CHECK(overall_accuracy(constant) == static_cast<double>(largest) / static_cast<double>(total));
  CHECK(largest == 2210);
  CHECK(average_accuracy(constant) == 1.0 / 16.0);
  CHECK(std::abs(kappa(constant)) < 1e-15);
}

TEST_CASE("report serialization and formatting") {
  const MetricsReport r = make_report(matrix(3, {5, 1, 0, 0, 3, 1, 2, 0, 4}));
  const MetricsReport back = MetricsReport::from_json(r.to_json());
  CHECK(back.oa == r.oa);
  CHECK(back.kappa == r.kappa);
  CHECK(back.confusion == r.confusion);
  CHECK(confusion_csv(r.confusion) == "true\\pred,1,2,3\n1,5,1,0\n2,0,3,1\n3,2,0,4\n");
  CHECK(percent(0.96764) == "96.76");
  CHECK(percent(1.0) == "100.00");
  const std::string table = format_table(r, {"a", "b", "c"});
  CHECK(table.find("OA") != std::string::npos);
  CHECK(table.find("Kappa") != std::string::npos);
  CHECK(table.find(percent(r.oa)) != std::string::npos);
}
