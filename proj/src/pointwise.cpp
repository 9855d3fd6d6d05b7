#include "pitdep/pointwise.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pitdep/error.hpp"
#include "pitdep/specfun.hpp"

namespace pitdep {
namespace {

constexpr double kGridTolerance = 1e-12;
constexpr const char* kMismatch = "method/kind mismatch";

// Tails that underflow are reported as the smallest normal double.
double doubled_tail(double lower, double upper) {
  return std::clamp(2.0 * std::min(lower, upper), DBL_MIN, 1.0);
}

std::vector<std::size_t> stable_order(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  return order;
}

void reject_boundaries(const PitSample& sample) {
  for (std::size_t j = 0; j < sample.size(); ++j) {
    const double u = sample.values[j];
    if (u == 0.0 || u == 1.0) {
      throw Error(ErrorCode::BoundaryValue, "value " + std::to_string(u) +
                                                " at position " + std::to_string(j) +
                                                "; " + std::string(kBoundaryRemedy));
    }
  }
}

void fill_transforms(PointwiseResult& result) {
  result.cauchy_t.resize(result.p_values.size());
  std::transform(result.p_values.begin(), result.p_values.end(), result.cauchy_t.begin(),
                 cauchy_transform);
}

}  // namespace

PitSample PitSample::continuous(std::vector<double> values) {
  PitSample s;
  s.values = std::move(values);
  s.kind = PitKind::Continuous;
  return s;
}

PitSample PitSample::rank_based(std::vector<double> values, std::int64_t draws) {
  PitSample s;
  s.values = std::move(values);
  s.kind = PitKind::RankBased;
  s.draws = draws;
  return s;
}

void validate(const PitSample& sample) {
  if (sample.values.empty()) throw Error(ErrorCode::EmptySample, "no PIT values");
  if (sample.kind == PitKind::RankBased && sample.draws < 1) {
    throw Error(ErrorCode::Domain, "rank-based sample needs S >= 1");
  }
  for (std::size_t j = 0; j < sample.size(); ++j) {
    const double u = sample.values[j];
    if (!std::isfinite(u)) {
      throw Error(ErrorCode::NonFiniteInput, "value at position " + std::to_string(j));
    }
    if (u < 0.0 || u > 1.0) {
      throw Error(ErrorCode::Domain, "value " + std::to_string(u) + " at position " +
                                         std::to_string(j) + " outside [0, 1]");
    }
    if (sample.kind == PitKind::RankBased) {
      const double scaled = u * static_cast<double>(sample.draws);
      if (std::fabs(scaled - std::round(scaled)) > 1e-9 * std::max(1.0, scaled)) {
        throw Error(ErrorCode::Domain, "value " + std::to_string(u) + " at position " +
                                           std::to_string(j) + " is off the rank grid");
      }
    }
  }
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::PotC: return "potc";
    case Method::PritC: return "pritc";
    case Method::PietC: return "pietc";
    case Method::KS: return "ks";
    case Method::AD: return "ad";
    case Method::PITOS: return "pitos";
  }
  return "unknown";
}

double cauchy_transform(double p) {
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  if (p >= 1.0) return -std::numeric_limits<double>::infinity();
  if (p == 0.5) return 0.0;
  if (p < 0.5) return 1.0 / std::tan(std::numbers::pi * p);
  return -1.0 / std::tan(std::numbers::pi * (1.0 - p));
}

PointwiseResult potc_pointwise(const PitSample& sample) {
  validate(sample);
  reject_boundaries(sample);
  const std::size_t n = sample.size();
  PointwiseResult result;
  result.method = Method::PotC;
  if (sample.kind != PitKind::Continuous) result.warnings.emplace_back(kMismatch);
  result.sort_order = stable_order(sample.values);
  result.index_map.resize(n);
  result.p_values.resize(n);
  result.tested_quantity.resize(n);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = result.sort_order[k];
    const double u = sample.values[j];
    const double i = static_cast<double>(k + 1);
    const double lower = specfun::reg_inc_beta(u, i, nd + 1.0 - i);
    const double upper = specfun::reg_inc_beta_upper(u, i, nd + 1.0 - i);
    result.index_map[j] = k;
    result.tested_quantity[k] = u;
    result.p_values[k] = doubled_tail(lower, upper);
  }
  fill_transforms(result);
  return result;
}

std::vector<double> auto_partition(std::size_t n, std::int64_t draws) {
  if (draws < 2) {
    throw Error(ErrorCode::InvalidPartition,
                "rank grid with S = " + std::to_string(draws) + " has no interior points");
  }
  const auto S = static_cast<std::uint64_t>(draws);
  const std::uint64_t interior = S - 1;
  std::vector<double> z;
  if (interior <= n) {
    for (std::uint64_t k = 1; k <= interior; ++k) z.push_back(static_cast<double>(k) / S);
    return z;
  }
  const std::uint64_t nn = n;
  for (std::uint64_t i = 1; i <= nn; ++i) {
    const std::uint64_t k = i * S / (nn + 1);
    z.push_back(static_cast<double>(k) / static_cast<double>(S));
  }
  return z;
}

std::vector<double> even_partition(std::size_t n) {
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = static_cast<double>(i + 1) / static_cast<double>(n + 1);
  }
  return z;
}

PointwiseResult pritc_pointwise(const PitSample& sample, const std::vector<double>& partition) {
  validate(sample);
  const std::size_t n = sample.size();
  PointwiseResult result;
  result.method = Method::PritC;
  if (partition.empty()) {
    if (sample.kind == PitKind::Continuous) {
      throw Error(ErrorCode::InvalidPartition,
                  "continuous input to PRIT-C needs an explicit partition");
    }
    result.partition = auto_partition(n, sample.draws);
  } else {
    for (std::size_t i = 0; i < partition.size(); ++i) {
      const double z = partition[i];
      if (!(z > 0.0 && z < 1.0)) {
        throw Error(ErrorCode::InvalidPartition,
                    "partition point " + std::to_string(z) + " not inside (0, 1)");
      }
      if (i > 0 && !(z > partition[i - 1])) {
        throw Error(ErrorCode::InvalidPartition, "partition is not strictly increasing");
      }
    }
    result.partition = partition;
  }
  if (sample.kind != PitKind::RankBased) result.warnings.emplace_back(kMismatch);

  result.sort_order = stable_order(sample.values);
  std::vector<double> sorted(n);
  for (std::size_t k = 0; k < n; ++k) sorted[k] = sample.values[result.sort_order[k]];

  const auto n64 = static_cast<std::int64_t>(n);
  const std::size_t m = result.partition.size();
  result.p_values.resize(m);
  result.tested_quantity.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double z = result.partition[i];
    const auto c = static_cast<std::int64_t>(
        std::upper_bound(sorted.begin(), sorted.end(), z + kGridTolerance) - sorted.begin());
    const double lower = specfun::binom_cdf(c, n64, z);
    // Pr(X >= c) = I_z(c, n - c + 1)
    const double upper =
        c == 0 ? 1.0
               : specfun::reg_inc_beta(z, static_cast<double>(c), static_cast<double>(n64 - c + 1));
    result.tested_quantity[i] = static_cast<double>(c);
    result.p_values[i] = doubled_tail(lower, upper);
  }

  result.index_map.assign(n, npos);
  for (std::size_t j = 0; j < n; ++j) {
    const auto it = std::lower_bound(result.partition.begin(), result.partition.end(),
                                     sample.values[j] - kGridTolerance);
    if (it != result.partition.end()) {
      result.index_map[j] = static_cast<std::size_t>(it - result.partition.begin());
    }
  }
  fill_transforms(result);
  return result;
}

PointwiseResult pietc_pointwise(const PitSample& sample, const Reference& reference) {
  validate(sample);
  reject_boundaries(sample);
  const std::size_t n = sample.size();
  PointwiseResult result;
  result.method = Method::PietC;
  if (sample.kind != PitKind::Continuous) result.warnings.emplace_back(kMismatch);
  result.sort_order = stable_order(sample.values);
  result.index_map.resize(n);
  std::iota(result.index_map.begin(), result.index_map.end(), std::size_t{0});
  result.p_values.resize(n);
  result.tested_quantity.resize(n);

  for (std::size_t j = 0; j < n; ++j) {
    const double u = sample.values[j];
    double x = 0.0;
    double p = 0.0;
    if (const auto* e = std::get_if<ExpReference>(&reference)) {
      x = specfun::exp_quantile(u, e->rate);
      p = doubled_tail(specfun::exp_cdf(x, e->rate), specfun::exp_sf(x, e->rate));
    } else if (std::holds_alternative<NormalReference>(reference)) {
      x = specfun::normal_quantile(u);
      const double tail = specfun::normal_sf(std::fabs(x));
      p = doubled_tail(tail, tail);
    } else {
      const auto& c = std::get<CustomReference>(reference);
      if (!c.quantile || !c.upper_tail) {
        throw Error(ErrorCode::Domain, "custom reference needs quantile and tail functions");
      }
      x = c.quantile(u);
      if (c.symmetric) {
        const double tail = Probability(c.upper_tail(std::fabs(x)));
        p = doubled_tail(tail, tail);
      } else {
        const double upper = Probability(c.upper_tail(x));
        p = doubled_tail(upper, 1.0 - upper);
      }
    }
    result.tested_quantity[j] = x;
    result.p_values[j] = p;
  }
  fill_transforms(result);
  return result;
}

}  // namespace pitdep
