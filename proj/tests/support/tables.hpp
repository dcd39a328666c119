#pragma once

// Per-class sample counts published for the three benchmark scenes.
// Columns: train, validation, test, total. Class order follows the manifests.

#include <array>
#include <cstddef>
#include <vector>

namespace tables {

struct Row {
  std::size_t train, validation, test, total;
};

inline const std::vector<Row> kIndianPines = {
    {3, 2, 41, 46}, {72, 71, 1285, 1428}, {41, 42, 747, 830}, {12, 12, 213, 237}, {24, 24, 435, 483},
    {37, 36, 657, 730}, {2, 1, 25, 28}, {24, 24, 430, 478}, {1, 1, 18, 20}, {48, 49, 875, 972},
    {122, 123, 2210, 2455}, {30, 29, 534, 593}, {10, 10, 185, 205}, {63, 63, 1139, 1265}, {20, 19, 347, 386},
    {4, 5, 84, 93}};

// Metal sheets: the printed total 1354 is a typo for 1345 (the row sums
// to 1345 and only 1345 makes the column add up to 42776).
inline const std::vector<Row> kPaviaUniversity = {
    {66, 66, 6499, 6631}, {186, 186, 18277, 18649}, {21, 21, 2057, 2099}, {30, 31, 3003, 3064},
    {14, 13, 1318, 1345}, {50, 50, 4929, 5029}, {13, 14, 1303, 1330}, {37, 37, 3608, 3682},
    {10, 9, 928, 947}};

// Classes 2 and 15: train + validation + test do not add up to the
// printed totals (3726, 7268). The totals are the ones that sum to 54129,
// so they are kept and the test column is taken as misprinted.
inline const std::vector<Row> kSalinas = {
    {20, 20, 1969, 2009}, {37, 37, 3625, 3726}, {20, 20, 1936, 1976}, {14, 14, 1366, 1394},
    {27, 27, 2624, 2678}, {40, 39, 3880, 3959}, {36, 36, 3507, 3579}, {112, 113, 11046, 11271},
    {62, 62, 6079, 6203}, {33, 33, 3212, 3278}, {11, 10, 1047, 1068}, {19, 20, 1888, 1927}, {9, 9, 898, 916},
    {10, 11, 1049, 1070}, {72, 73, 7213, 7268}, {18, 18, 1771, 1807}};

inline std::vector<std::size_t> totals(const std::vector<Row>& rows) {
  std::vector<std::size_t> t;
  for (const Row& r : rows) t.push_back(r.total);
  return t;
}

}  // namespace tables
