#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <vector>

#include "pitdep/combine.hpp"
#include "pitdep/pointwise.hpp"

namespace pitdep {

struct EcdfPoint {
  double x = 0.0;
  double ecdf = 0.0;
  double tilted = 0.0;
  bool highlighted = false;
};

struct InfluenceReport {
  std::vector<double> phi;
  double gamma = 0.0;
  std::set<std::size_t> influential;
  double harmonic_n = 0.0;
  double grand_value = 0.0;
  std::vector<EcdfPoint> ecdf_points;
};

double harmonic_number(std::size_t n);

// Shapley values of the mean game v(S) = mean of t over S, in O(n).
std::vector<double> shapley_values(const std::vector<double>& cauchy_t);

// { i : phi_i > gamma }. gamma must lie in [0, max(0, max phi)].
std::set<std::size_t> influential_region(const std::vector<double>& phi, double gamma);

// 0 when the global test rejects, otherwise half the largest phi (or 0).
double auto_gamma(const std::vector<double>& phi, double p_star, double alpha);

// One point per observation in sorted order.
std::vector<EcdfPoint> ecdf_plot_data(const PitSample& sample, const PointwiseResult& pointwise,
                                      const std::set<std::size_t>& influential);

// Shapley attribution of the combined statistic, IR(gamma) and plot data.
// gamma defaults to auto_gamma.
InfluenceReport analyze_influence(const PitSample& sample, const PointwiseResult& pointwise,
                                  Combiner combiner, double alpha,
                                  std::optional<double> gamma = std::nullopt);

}  // namespace pitdep
