#include "pitdep/influence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pitdep/error.hpp"

namespace pitdep {

double harmonic_number(std::size_t n) {
  double h = 0.0;
  for (std::size_t k = n; k >= 1; --k) h += 1.0 / static_cast<double>(k);
  return h;
}

std::vector<double> shapley_values(const std::vector<double>& cauchy_t) {
  const std::size_t n = cauchy_t.size();
  if (n == 0) throw Error(ErrorCode::EmptySample, "no Cauchy terms");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(cauchy_t[i])) {
      throw Error(ErrorCode::NonFiniteInput, "Cauchy term at index " + std::to_string(i));
    }
  }
  if (n == 1) return cauchy_t;
  const double nd = static_cast<double>(n);
  const double total = std::accumulate(cauchy_t.begin(), cauchy_t.end(), 0.0);
  const double spread = (harmonic_number(n) - 1.0) / nd;
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = cauchy_t[i];
    const double others = (total - t) / (nd - 1.0);
    phi[i] = t / nd + spread * (t - others);
  }
  return phi;
}

std::set<std::size_t> influential_region(const std::vector<double>& phi, double gamma) {
  const double top = phi.empty() ? 0.0 : *std::max_element(phi.begin(), phi.end());
  const double upper = std::max(0.0, top);
  if (!(gamma >= 0.0 && gamma <= upper)) {
    throw Error(ErrorCode::GammaOutOfRange, "gamma " + std::to_string(gamma) +
                                                " outside [0, " + std::to_string(upper) + "]");
  }
  std::set<std::size_t> region;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (phi[i] > gamma) region.insert(i);
  }
  return region;
}

double auto_gamma(const std::vector<double>& phi, double p_star, double alpha) {
  if (p_star <= alpha || phi.empty()) return 0.0;
  return std::max(0.0, *std::max_element(phi.begin(), phi.end()) / 2.0);
}

std::vector<EcdfPoint> ecdf_plot_data(const PitSample& sample, const PointwiseResult& pointwise,
                                      const std::set<std::size_t>& influential) {
  const std::size_t n = sample.size();
  if (pointwise.index_map.size() != n || pointwise.sort_order.size() != n) {
    throw Error(ErrorCode::IndexMismatch,
                "pointwise result covers " + std::to_string(pointwise.index_map.size()) +
                    " observations, sample has " + std::to_string(n));
  }
  std::vector<EcdfPoint> points(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = pointwise.sort_order[k];
    const std::size_t test = pointwise.index_map[j];
    EcdfPoint& pt = points[k];
    pt.x = sample.values[j];
    pt.ecdf = static_cast<double>(k + 1) / static_cast<double>(n);
    pt.tilted = pt.ecdf - pt.x;
    pt.highlighted = test != npos && influential.count(test) > 0;
  }
  return points;
}

InfluenceReport analyze_influence(const PitSample& sample, const PointwiseResult& pointwise,
                                  Combiner combiner, double alpha, std::optional<double> gamma) {
  InfluenceReport report;
  const auto terms = combination_terms(pointwise.p_values, combiner);
  report.phi = shapley_values(terms);
  report.harmonic_n = harmonic_number(terms.size());
  report.grand_value =
      std::accumulate(terms.begin(), terms.end(), 0.0) / static_cast<double>(terms.size());
  const double p_star = combine(pointwise.p_values, combiner).p_star;
  report.gamma = gamma ? *gamma : auto_gamma(report.phi, p_star, alpha);
  report.influential = influential_region(report.phi, report.gamma);
  report.ecdf_points = ecdf_plot_data(sample, pointwise, report.influential);
  return report;
}

}  // namespace pitdep
