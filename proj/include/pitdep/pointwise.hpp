#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace pitdep {

enum class PitKind { Continuous, RankBased };

// PIT values u_1..u_n. Rank-based samples sit on the grid {0, 1/S, ..., 1}
// where S is the number of comparison draws.
struct PitSample {
  std::vector<double> values;
  PitKind kind = PitKind::Continuous;
  std::int64_t draws = 0;

  static PitSample continuous(std::vector<double> values);
  static PitSample rank_based(std::vector<double> values, std::int64_t draws);

  std::size_t size() const noexcept { return values.size(); }
};

// Throws EmptySample, NonFiniteInput or DomainError.
void validate(const PitSample& sample);

enum class Method { PotC, PritC, PietC, KS, AD, PITOS };

std::string_view to_string(Method method);

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

// Per-test p-values. For POT-C the tests follow sorted order, for PRIT-C the
// partition points, for PIET-C the input order.
struct PointwiseResult {
  Method method = Method::PotC;
  std::vector<double> p_values;
  std::vector<double> tested_quantity;
  std::vector<double> cauchy_t;
  // index_map[j]: test owning input observation j (npos if none).
  std::vector<std::size_t> index_map;
  // sort_order[k]: input position of the k-th smallest value.
  std::vector<std::size_t> sort_order;
  // PRIT-C partition points actually used.
  std::vector<double> partition;
  std::vector<std::string> warnings;
};

// tan((0.5 - p) pi), evaluated as cot(pi p) so small p keep their digits.
double cauchy_transform(double p);

PointwiseResult potc_pointwise(const PitSample& sample);

// Empty partition means Auto.
PointwiseResult pritc_pointwise(const PitSample& sample,
                                const std::vector<double>& partition = {});

// Auto partition for a rank-based sample: the grid {1/S, ..., (S-1)/S},
// thinned to at most n evenly spaced points.
std::vector<double> auto_partition(std::size_t n, std::int64_t draws);

// z_i = i / (n + 1), i = 1..n. Used for PRIT-C on continuous PITs.
std::vector<double> even_partition(std::size_t n);

struct ExpReference {
  double rate = 1.0;
};
struct NormalReference {};
// User supplied reference. For symmetric references the distribution must be
// symmetric about zero.
struct CustomReference {
  std::function<double(double)> quantile;
  std::function<double(double)> upper_tail;
  bool symmetric = false;
};
using Reference = std::variant<ExpReference, NormalReference, CustomReference>;

PointwiseResult pietc_pointwise(const PitSample& sample, const Reference& reference);

}  // namespace pitdep
