#include "pitdep/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pitdep/error.hpp"
#include "pitdep/specfun.hpp"

namespace pitdep {
namespace {

constexpr double kSeriesCutoff = 1e-12;

std::vector<double> sorted_copy(const std::vector<double>& values) {
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

double ad_inf(double z) {
  if (z <= 0.0) return 0.0;
  if (z < 2.0) {
    return std::exp(-1.2337141 / z) / std::sqrt(z) *
           (2.00012 +
            (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) *
                z);
  }
  return std::exp(-std::exp(
      1.0776 -
      (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z));
}

double ad_errfix(double n, double x) {
  const double c = 0.01265 + 0.1757 / n;
  if (x < c) {
    double t = x / c;
    t = std::sqrt(t) * (1.0 - t) * (49.0 * t - 102.0);
    return t * (0.0037 / (n * n * n) + 0.00078 / (n * n) + 0.00006 / n);
  }
  if (x < 0.8) {
    double t = (x - c) / (0.8 - c);
    t = -0.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t;
    return t * (0.04213 / n + 0.01365 / (n * n));
  }
  const double g3 =
      -130.2137 +
      (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x;
  return g3 / n;
}

void warn_if_ranked(const PitSample& sample, TestReport& report) {
  if (sample.kind != PitKind::Continuous) report.notes.emplace_back("method/kind mismatch");
}

}  // namespace

double ks_statistic(const std::vector<double>& values) {
  const auto sorted = sorted_copy(values);
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double i = static_cast<double>(k);
    d = std::max({d, (i + 1.0) / n - sorted[k], sorted[k] - i / n});
  }
  return d;
}

double kolmogorov_sf(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.0) {
    // Theta-function form converges fast for small arguments.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1;; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * c);
      sum += term;
      if (term < kSeriesCutoff) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1;; ++k) {
    const double kd = k;
    const double term = std::exp(-2.0 * kd * kd * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < kSeriesCutoff) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestReport ks_test(const PitSample& sample, double alpha) {
  validate(sample);
  const double n = static_cast<double>(sample.size());
  const double d = ks_statistic(sample.values);
  const double root_n = std::sqrt(n);
  const double lambda = root_n * d + 1.0 / (6.0 * root_n) + (root_n * d - 1.0) / (4.0 * n);
  TestReport report = make_report(Method::KS, Combiner::None, {d, kolmogorov_sf(lambda)}, alpha,
                                  sample.size());
  warn_if_ranked(sample, report);
  return report;
}

double ad_statistic(const std::vector<double>& values) {
  const auto sorted = sorted_copy(values);
  const std::size_t n = sorted.size();
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double weight = 2.0 * static_cast<double>(k) + 1.0;
    sum += weight * (std::log(sorted[k]) + std::log1p(-sorted[n - 1 - k]));
  }
  const double nd = static_cast<double>(n);
  return -nd - sum / nd;
}

double ad_sf(double a2, std::size_t n) {
  const double x = ad_inf(a2);
  const double cdf = x + ad_errfix(static_cast<double>(n), x);
  return std::clamp(1.0 - cdf, 0.0, 1.0);
}

TestReport ad_test(const PitSample& sample, double alpha) {
  validate(sample);
  for (std::size_t j = 0; j < sample.size(); ++j) {
    const double u = sample.values[j];
    if (u == 0.0 || u == 1.0) {
      throw Error(ErrorCode::BoundaryValue,
                  "Anderson-Darling needs values inside (0, 1); position " + std::to_string(j));
    }
  }
  const double a2 = ad_statistic(sample.values);
  TestReport report = make_report(Method::AD, Combiner::None, {a2, ad_sf(a2, sample.size())},
                                  alpha, sample.size());
  warn_if_ranked(sample, report);
  return report;
}

}  // namespace pitdep
