#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "pitdep/combine.hpp"
#include "pitdep/pointwise.hpp"

namespace pitdep {

inline constexpr double kPitosCorrection = 1.15;

// 1-based order-statistic index pairs, i != j, no duplicates.
struct PairSet {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t target_count = 0;
};

// Conditional order-statistic p-value for u_(j) given u_(i), 1-based indices
// into the sorted sample.
double conditional_p(const std::vector<double>& u_sorted, std::size_t i, std::size_t j);

// Halton (2, 3) points mapped to index pairs, deduplicated. The budget is
// capped at n (n - 1).
PairSet halton_pairs(std::size_t n, std::size_t budget);

// POT-C marginals plus conditional pair tests, CCT-aggregated. global_p is
// min(1, 1.15 p*); raw_p keeps the uncorrected value. budget 0 means 2n.
TestReport pitos_test(const PitSample& sample, std::size_t pair_budget = 0, double alpha = 0.05);

}  // namespace pitdep
