#pragma once

#include "pitdep/combine.hpp"
#include "pitdep/pointwise.hpp"

namespace pitdep {

// Kolmogorov-Smirnov against Uniform(0, 1); asymptotic p-value with a
// finite-n correction to the argument.
TestReport ks_test(const PitSample& sample, double alpha = 0.05);

// Anderson-Darling against Uniform(0, 1). Values must avoid 0 and 1.
TestReport ad_test(const PitSample& sample, double alpha = 0.05);

double ks_statistic(const std::vector<double>& values);
double ad_statistic(const std::vector<double>& values);

// Pr(K > lambda) for the limiting Kolmogorov distribution.
double kolmogorov_sf(double lambda);

// Pr(A^2 > a2) for sample size n under a uniform null (Marsaglia & Marsaglia).
double ad_sf(double a2, std::size_t n);

}  // namespace pitdep
