#include "pitdep/pitos.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <set>

#include "pitdep/error.hpp"
#include "pitdep/specfun.hpp"

namespace pitdep {
namespace {

double radical_inverse(std::size_t k, std::size_t base) {
  double result = 0.0;
  double scale = 1.0 / static_cast<double>(base);
  while (k > 0) {
    result += static_cast<double>(k % base) * scale;
    k /= base;
    scale /= static_cast<double>(base);
  }
  return result;
}

std::size_t to_index(double h, std::size_t n) {
  const auto i = static_cast<std::size_t>(std::llround(h * static_cast<double>(n)));
  return std::clamp<std::size_t>(i, 1, n);
}

// Keeps CCT finite when a test lands exactly on 0 or 1.
double clamp_open(double p) { return std::clamp(p, DBL_MIN, std::nextafter(1.0, 0.0)); }

}  // namespace

double conditional_p(const std::vector<double>& u_sorted, std::size_t i, std::size_t j) {
  const std::size_t n = u_sorted.size();
  if (i < 1 || j < 1 || i > n || j > n || i == j) {
    throw Error(ErrorCode::Domain, "pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                       ") invalid for n = " + std::to_string(n));
  }
  const double ui = u_sorted[i - 1];
  const double uj = u_sorted[j - 1];
  for (double u : {ui, uj}) {
    if (!(u > 0.0 && u < 1.0)) {
      throw Error(ErrorCode::BoundaryValue, "order statistic " + std::to_string(u) + "; " +
                                                std::string(kBoundaryRemedy));
    }
  }
  if (ui == uj) {
    throw Error(ErrorCode::TieError, "u_(" + std::to_string(i) + ") = u_(" +
                                         std::to_string(j) + ") = " + std::to_string(ui));
  }
  if ((i < j) != (ui < uj)) {
    throw Error(ErrorCode::OrderingViolation, "order statistics are not sorted");
  }
  const double nd = static_cast<double>(n);
  const double id = static_cast<double>(i);
  const double jd = static_cast<double>(j);
  double x, a, b;
  if (i < j) {
    x = (uj - ui) / (1.0 - ui);
    a = jd - id;
    b = nd + 1.0 - jd;
  } else {
    x = uj / ui;
    a = jd;
    b = id - jd;
  }
  if (!(x > 0.0 && x < 1.0)) {
    throw Error(ErrorCode::TieError, "conditioning ratio " + std::to_string(x) +
                                         " collapsed to the boundary");
  }
  const double lower = specfun::reg_inc_beta(x, a, b);
  const double upper = specfun::reg_inc_beta_upper(x, a, b);
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

PairSet halton_pairs(std::size_t n, std::size_t budget) {
  PairSet set;
  set.target_count = std::min(budget, n < 2 ? 0 : n * (n - 1));
  std::set<std::pair<std::size_t, std::size_t>> seen;
  // Low-discrepancy points eventually hit every cell; the cap only guards
  // against pathological budgets.
  const std::size_t max_points = 64 * (set.target_count + n * n) + 1024;
  for (std::size_t k = 1; set.pairs.size() < set.target_count && k <= max_points; ++k) {
    const std::size_t i = to_index(radical_inverse(k, 2), n);
    const std::size_t j = to_index(radical_inverse(k, 3), n);
    if (i == j || !seen.emplace(i, j).second) continue;
    set.pairs.emplace_back(i, j);
  }
  return set;
}

TestReport pitos_test(const PitSample& sample, std::size_t pair_budget, double alpha) {
  validate(sample);
  if (sample.kind != PitKind::Continuous) {
    throw Error(ErrorCode::Domain, "PITOS is restricted to continuous PIT samples");
  }
  const std::size_t n = sample.size();
  if (n < 2) throw Error(ErrorCode::EmptySample, "PITOS needs n >= 2");
  const PointwiseResult marginal = potc_pointwise(sample);
  std::vector<double> u_sorted(marginal.tested_quantity);

  const PairSet pairs = halton_pairs(n, pair_budget == 0 ? 2 * n : pair_budget);
  std::vector<double> p_values(marginal.p_values);
  std::size_t dropped = 0;
  for (const auto& [i, j] : pairs.pairs) {
    try {
      p_values.push_back(conditional_p(u_sorted, i, j));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonConvergence) throw;
      ++dropped;
    }
  }
  std::size_t clamped = 0;
  for (double& p : p_values) {
    const double c = clamp_open(p);
    if (c != p) ++clamped;
    p = c;
  }
  const Combined raw = cct(p_values);
  Combined corrected = raw;
  corrected.p_star = std::min(1.0, kPitosCorrection * raw.p_star);
  TestReport report = make_report(Method::PITOS, Combiner::CCT, corrected, alpha, n);
  report.raw_p = raw.p_star;
  report.pairs_used = p_values.size() - n;
  report.pairs_dropped = dropped;
  if (clamped > 0) {
    report.notes.push_back(std::to_string(clamped) + " p-values clamped into (0, 1)");
  }
  return report;
}

}  // namespace pitdep
