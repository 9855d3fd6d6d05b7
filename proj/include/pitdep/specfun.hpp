#pragma once

// Distribution primitives used by the pointwise tests, the baselines and the
// simulation laboratory. Everything here is a pure function of its arguments.
//
// Accuracy targets (absolute error):
//   reg_inc_beta   1e-12 for a, b <= 1e6
//   normal_cdf     1e-12
//   quantiles      round trip within 1e-9 (relative for large arguments)
// p-values below roughly 1e-14 are only meaningful in order of magnitude.

#include <cstdint>

namespace pitdep {

// A value in [0, 1]. Inputs within 1e-12 of the interval are clamped; anything
// further out is a DomainError.
class Probability {
 public:
  static constexpr double kTolerance = 1e-12;

  constexpr Probability() = default;
  explicit Probability(double value);

  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

namespace specfun {

// Regularized incomplete beta I_x(a, b).
Probability reg_inc_beta(double x, double a, double b);
// 1 - I_x(a, b), keeping relative accuracy when the result is small.
Probability reg_inc_beta_upper(double x, double a, double b);

// log(x^a (1-x)^b / B(a, b)), evaluated without cancellation for large a, b.
double log_beta_power_terms(double x, double a, double b);

// Pr(X <= k), X ~ Binomial(n, p).
Probability binom_cdf(std::int64_t k, std::int64_t n, double p);

Probability cauchy_cdf(double t);
// 1 - cauchy_cdf(t), accurate in the upper tail.
Probability cauchy_sf(double t);
double cauchy_quantile(double p);

Probability normal_cdf(double z);
// 1 - normal_cdf(z) without cancellation.
Probability normal_sf(double z);
double normal_quantile(double p);

Probability student_t_cdf(double t, double nu);

Probability exp_cdf(double x, double rate);
Probability exp_sf(double x, double rate);
double exp_quantile(double p, double rate);

}  // namespace specfun
}  // namespace pitdep
