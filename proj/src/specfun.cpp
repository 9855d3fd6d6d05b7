#include "pitdep/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pitdep/error.hpp"

namespace pitdep {

Probability::Probability(double value) {
  if (!(value >= -kTolerance && value <= 1.0 + kTolerance)) {
    throw Error(ErrorCode::Domain,
                "probability " + std::to_string(value) + " outside [0, 1]");
  }
  value_ = value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value);
}

namespace specfun {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kBaseIterations = 500;
constexpr double kConvergence = 1e-15;
constexpr double kTiny = 1e-300;

// Remainder of Stirling's series: lgamma(z) - [(z-0.5)log z - z + 0.5 log 2pi].
// Accurate to ~1e-16 for z >= 10.
double stirling_delta(double z) {
  const double r = 1.0 / z;
  const double r2 = r * r;
  return r *
         (1.0 / 12.0 +
          r2 * (-1.0 / 360.0 +
                r2 * (1.0 / 1260.0 +
                      r2 * (-1.0 / 1680.0 +
                            r2 * (1.0 / 1188.0 +
                                  r2 * (-691.0 / 360360.0 + r2 / 156.0))))));
}

// lgamma(hi) - lgamma(hi + lo) for hi >= 10 without cancellation.
double lgamma_ratio(double hi, double lo) {
  return -lo * std::log(hi) - (hi + lo - 0.5) * std::log1p(lo / hi) + lo +
         stirling_delta(hi) - stirling_delta(hi + lo);
}

// log(x^a y^b / B(a, b)) with y = 1 - x supplied separately so callers that
// know 1 - x exactly do not lose it to rounding.
double power_terms(double x, double y, double a, double b) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  if (lo >= 10.0) {
    // Centre on the mode so the large a log x and b log y pieces cancel
    // analytically rather than numerically.
    const double s = a + b;
    const double x0 = a / s;
    const double y0 = b / s;
    const double dx = x < 0.5 ? x - x0 : y0 - y;
    const double centred = a * std::log1p(dx / x0) + b * std::log1p(-dx / y0);
    return centred + 0.5 * std::log(a * b / (2.0 * kPi * s)) -
           stirling_delta(a) - stirling_delta(b) + stirling_delta(s);
  }
  double log_beta;
  if (hi >= 10.0) {
    log_beta = std::lgamma(lo) + lgamma_ratio(hi, lo);
  } else {
    log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  }
  const double lx = x < 0.5 ? std::log(x) : std::log1p(-y);
  const double ly = y < 0.5 ? std::log(y) : std::log1p(-x);
  return a * lx + b * ly - log_beta;
}

// Continued fraction for I_x(a, b) (modified Lentz). Near the mode the
// number of terms grows like sqrt(a + b), so the cap does too. The recurrence
// runs in extended precision: with one shape near 1e6 the double-precision
// recurrence and the rounding of a reflected argument 1 - x each cost ~1e-12.
double beta_continued_fraction(long double x, double a_in, double b_in) {
  using real = long double;
  const int max_iterations =
      kBaseIterations + static_cast<int>(std::ceil(std::sqrt(a_in + b_in)));
  const real a = a_in;
  const real b = b_in;
  const real tiny = kTiny;
  const real qab = a + b;
  const real qap = a + 1.0L;
  const real qam = a - 1.0L;
  real c = 1.0L;
  real d = 1.0L - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0L / d;
  real h = d;
  for (int m = 1; m <= max_iterations; ++m) {
    const real m2 = 2.0L * m;
    real aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0L + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0L + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0L / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0L + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0L + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0L / d;
    const real del = d * c;
    h *= del;
    if (std::fabs(del - 1.0L) < kConvergence) return static_cast<double>(h);
  }
  throw Error(ErrorCode::NonConvergence,
              "incomplete beta continued fraction did not converge for a=" +
                  std::to_string(a_in) + ", b=" + std::to_string(b_in) +
                  ", x=" + std::to_string(static_cast<double>(x)));
}

// 1 - v carried to extended precision; exact in double only for v >= 0.5.
long double complement(double v) { return 1.0L - static_cast<long double>(v); }

double ibeta_xy(double x, double y, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  if (x > (a + 1.0) / (a + b + 2.0)) {
    const long double y_ext = x < 0.5 ? complement(x) : y;
    return 1.0 - std::exp(power_terms(y, x, b, a)) *
                     beta_continued_fraction(y_ext, b, a) / b;
  }
  const long double x_ext = y < 0.5 ? complement(y) : x;
  return std::exp(power_terms(x, y, a, b)) *
         beta_continued_fraction(x_ext, a, b) / a;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::Domain, std::string(name) + " must be positive and finite");
  }
}

void require_unit(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::Domain, std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

double log_beta_power_terms(double x, double a, double b) {
  require_unit(x, "x");
  require_positive(a, "a");
  require_positive(b, "b");
  return power_terms(x, 1.0 - x, a, b);
}

Probability reg_inc_beta(double x, double a, double b) {
  require_unit(x, "x");
  require_positive(a, "a");
  require_positive(b, "b");
  return Probability(ibeta_xy(x, 1.0 - x, a, b));
}

Probability reg_inc_beta_upper(double x, double a, double b) {
  require_unit(x, "x");
  require_positive(a, "a");
  require_positive(b, "b");
  return Probability(ibeta_xy(1.0 - x, x, b, a));
}

Probability binom_cdf(std::int64_t k, std::int64_t n, double p) {
  if (n < 1) throw Error(ErrorCode::Domain, "binomial size must be >= 1");
  require_unit(p, "p");
  if (k < 0) return Probability(0.0);
  if (k >= n) return Probability(1.0);
  // Pr(X <= k) = I_{1-p}(n-k, k+1)
  return Probability(ibeta_xy(1.0 - p, p, static_cast<double>(n - k),
                              static_cast<double>(k + 1)));
}

Probability cauchy_cdf(double t) {
  if (std::isnan(t)) throw Error(ErrorCode::Domain, "cauchy_cdf of NaN");
  if (t > 0.0) return Probability(1.0 - std::atan(1.0 / t) / kPi);
  if (t < 0.0) return Probability(std::atan(-1.0 / t) / kPi);
  return Probability(0.5);
}

Probability cauchy_sf(double t) { return cauchy_cdf(-t); }

double cauchy_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::Domain, "cauchy_quantile requires 0 < p < 1");
  }
  if (p == 0.5) return 0.0;
  if (p > 0.5) return 1.0 / std::tan(kPi * (1.0 - p));
  return -1.0 / std::tan(kPi * p);
}

Probability normal_cdf(double z) {
  if (std::isnan(z)) throw Error(ErrorCode::Domain, "normal_cdf of NaN");
  return Probability(0.5 * std::erfc(-z / std::numbers::sqrt2));
}

Probability normal_sf(double z) { return normal_cdf(-z); }

namespace {

// Lower half only (p <= 0.5): rational start refined by one Halley step.
double normal_quantile_lower(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
  if (density > 0.0 && std::isfinite(density)) {
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e / density;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::Domain, "normal_quantile requires 0 < p < 1");
  }
  if (p > 0.5) return -normal_quantile_lower(1.0 - p);
  return normal_quantile_lower(p);
}

Probability student_t_cdf(double t, double nu) {
  require_positive(nu, "nu");
  if (std::isnan(t)) throw Error(ErrorCode::Domain, "student_t_cdf of NaN");
  if (t == 0.0) return Probability(0.5);
  if (std::isinf(t)) return Probability(t > 0.0 ? 1.0 : 0.0);
  const double t2 = t * t;
  const double x = nu / (nu + t2);
  const double y = t2 / (nu + t2);
  const double tail = 0.5 * ibeta_xy(x, y, 0.5 * nu, 0.5);
  return Probability(t > 0.0 ? 1.0 - tail : tail);
}

Probability exp_cdf(double x, double rate) {
  require_positive(rate, "rate");
  if (x <= 0.0) return Probability(0.0);
  return Probability(-std::expm1(-rate * x));
}

Probability exp_sf(double x, double rate) {
  require_positive(rate, "rate");
  if (x <= 0.0) return Probability(1.0);
  return Probability(std::exp(-rate * x));
}

double exp_quantile(double p, double rate) {
  require_positive(rate, "rate");
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error(ErrorCode::Domain, "exp_quantile requires 0 <= p < 1");
  }
  return -std::log1p(-p) / rate;
}

}  // namespace specfun
}  // namespace pitdep
