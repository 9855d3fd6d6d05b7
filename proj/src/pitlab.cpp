#include "pitdep/pitlab.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "pitdep/error.hpp"
#include "pitdep/specfun.hpp"

namespace pitdep {
namespace {

constexpr double kBetaPrior = 1.0;
constexpr double kGammaShapePrior = 1.0;
constexpr double kGammaRatePrior = 0.1;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::Config, what);
}

double prior_precision(double tau) { return std::isinf(tau) ? 0.0 : 1.0 / (tau * tau); }

double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

std::mt19937_64& need_jitter(std::mt19937_64* jitter) {
  if (!jitter) {
    throw Error(ErrorCode::Domain, "randomized PITs for count models need a random stream");
  }
  return *jitter;
}

double sample_beta(std::mt19937_64& rng, double a, double b) {
  const double x = std::gamma_distribution<double>(a, 1.0)(rng);
  const double y = std::gamma_distribution<double>(b, 1.0)(rng);
  if (x + y == 0.0) return a / (a + b);
  return x / (x + y);
}

std::int64_t as_count(double y) { return static_cast<std::int64_t>(std::llround(y)); }

double group_sum(const Eigen::MatrixXd& data, Eigen::Index g) { return data.row(g).sum(); }

void check_shape(const ConjugateHierSpec& spec, const Eigen::MatrixXd& data) {
  if (data.rows() != spec.G || data.cols() != spec.m) {
    throw Error(ErrorCode::IndexMismatch,
                "data is " + std::to_string(data.rows()) + " x " + std::to_string(data.cols()) +
                    ", spec expects " + std::to_string(spec.G) + " x " + std::to_string(spec.m));
  }
  for (Eigen::Index g = 0; g < data.rows(); ++g) {
    for (Eigen::Index i = 0; i < data.cols(); ++i) {
      if (!std::isfinite(data(g, i))) {
        throw Error(ErrorCode::NonFiniteInput, "observation (" + std::to_string(g) + ", " +
                                                   std::to_string(i) + ")");
      }
    }
  }
}

// Normal-normal PIT with `self` = 1 when y is part of its own conditioning set.
PitSample normal_pit(const ConjugateHierSpec& spec, const Eigen::MatrixXd& data, bool self) {
  const NormalFit fit = resolve_fit(spec, data);
  const double prior_prec = prior_precision(fit.tau);
  const double noise_prec = 1.0 / (fit.sigma * fit.sigma);
  const double others = self ? spec.m : spec.m - 1;
  const double prec = prior_prec + others * noise_prec;
  if (!(prec > 0.0)) {
    throw Error(ErrorCode::Domain, "improper leave-one-out posterior: m = 1 with a flat prior");
  }
  const double sd = std::sqrt(1.0 / prec + fit.sigma * fit.sigma);
  std::vector<double> u;
  u.reserve(spec.n());
  for (Eigen::Index g = 0; g < data.rows(); ++g) {
    const double total = group_sum(data, g);
    for (Eigen::Index i = 0; i < data.cols(); ++i) {
      const double y = data(g, i);
      const double s = self ? total : total - y;
      const double prior_term = prior_prec > 0.0 ? prior_prec * fit.mu0 : 0.0;
      const double mean = (prior_term + noise_prec * s) / prec;
      const double z = (y - mean) / sd;
      u.push_back(clamp_pit(specfun::normal_cdf(z)));
    }
  }
  return PitSample::continuous(std::move(u));
}

PitSample count_pit(const ConjugateHierSpec& spec, const Eigen::MatrixXd& data, bool self,
                    std::mt19937_64& jitter) {
  std::vector<double> u;
  u.reserve(spec.n());
  const double others = self ? spec.m : spec.m - 1;
  for (Eigen::Index g = 0; g < data.rows(); ++g) {
    const double total = group_sum(data, g);
    for (Eigen::Index i = 0; i < data.cols(); ++i) {
      const std::int64_t y = as_count(data(g, i));
      const double s = self ? total : total - static_cast<double>(y);
      double hi = 0.0, lo = 0.0;
      if (const auto* bb = std::get_if<BetaBinomialDgp>(&spec.dgp)) {
        const double a = kBetaPrior + s;
        const double b = kBetaPrior + others * static_cast<double>(bb->N) - s;
        hi = beta_binomial_cdf(y, bb->N, a, b);
        lo = beta_binomial_cdf(y - 1, bb->N, a, b);
      } else {
        const double shape = kGammaShapePrior + s;
        const double rate = kGammaRatePrior + others;
        hi = negative_binomial_cdf(y, shape, rate);
        lo = negative_binomial_cdf(y - 1, shape, rate);
      }
      u.push_back(clamp_pit(randomized_pit_discrete(hi, std::min(lo, hi), uniform01(jitter))));
    }
  }
  return PitSample::continuous(std::move(u));
}

}  // namespace

bool is_discrete(const Dgp& dgp) {
  return std::holds_alternative<BetaBinomialDgp>(dgp) ||
         std::holds_alternative<NegBinomialDgp>(dgp);
}

void validate(const ConjugateHierSpec& spec) {
  require(spec.G >= 1 && spec.m >= 1, "G and m must be positive");
  require(spec.n() >= 2, "n = G m must be at least 2");
  require(spec.sigma > 0.0 && std::isfinite(spec.sigma), "sigma must be positive and finite");
  require(spec.tau > 0.0, "tau must be positive");
  require(std::isfinite(spec.mu0), "mu0 must be finite");
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, StudentTDgp>) {
          require(d.nu > 0.0, "nu must be positive");
        } else if constexpr (std::is_same_v<T, LogNormalDgp>) {
          require(d.sigma_log > 0.0, "sigma_log must be positive");
        } else if constexpr (std::is_same_v<T, GeneralizedNormalDgp>) {
          require(d.alpha > 0.0 && d.beta > 0.0, "alpha and beta must be positive");
        } else if constexpr (std::is_same_v<T, BetaBinomialDgp>) {
          require(d.N >= 1 && d.phi > 0.0, "N must be >= 1 and phi positive");
        } else if constexpr (std::is_same_v<T, NegBinomialDgp>) {
          require(d.phi > 0.0, "phi must be positive");
        }
      },
      spec.dgp);
  if (spec.fit == FitMode::Plugin) {
    require(spec.m >= 2 && spec.G >= 2, "plugin fit needs G >= 2 and m >= 2");
  }
  if (spec.m == 1 && std::isinf(spec.tau)) {
    throw Error(ErrorCode::Domain, "improper leave-one-out posterior: m = 1 with a flat prior");
  }
}

double sample_generalized_normal(std::mt19937_64& rng, double alpha, double beta) {
  const double g = std::gamma_distribution<double>(1.0 / beta, 1.0)(rng);
  const double magnitude = alpha * std::pow(g, 1.0 / beta);
  return uniform01(rng) < 0.5 ? -magnitude : magnitude;
}

Eigen::MatrixXd simulate_data(const ConjugateHierSpec& spec, std::mt19937_64& rng) {
  validate(spec);
  require(std::isfinite(spec.tau), "simulation needs a finite tau");
  Eigen::MatrixXd y(spec.G, spec.m);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int g = 0; g < spec.G; ++g) {
    const double mu = spec.mu0 + spec.tau * normal(rng);
    for (int i = 0; i < spec.m; ++i) {
      double v = 0.0;
      if (std::holds_alternative<NormalDgp>(spec.dgp)) {
        v = mu + spec.sigma * normal(rng);
      } else if (const auto* t = std::get_if<StudentTDgp>(&spec.dgp)) {
        v = mu + spec.sigma * std::student_t_distribution<double>(t->nu)(rng);
      } else if (const auto* ln = std::get_if<LogNormalDgp>(&spec.dgp)) {
        v = std::exp(mu + ln->sigma_log * normal(rng));
      } else if (const auto* gn = std::get_if<GeneralizedNormalDgp>(&spec.dgp)) {
        v = mu + sample_generalized_normal(rng, gn->alpha, gn->beta);
      } else if (const auto* bb = std::get_if<BetaBinomialDgp>(&spec.dgp)) {
        const double q = 1.0 / (1.0 + std::exp(-mu));
        const double pi = sample_beta(rng, bb->phi * q, bb->phi * (1.0 - q));
        v = static_cast<double>(std::binomial_distribution<std::int64_t>(bb->N, pi)(rng));
      } else {
        const auto& nb = std::get<NegBinomialDgp>(spec.dgp);
        const double lambda = std::gamma_distribution<double>(nb.phi, std::exp(mu) / nb.phi)(rng);
        v = lambda > 0.0
                ? static_cast<double>(std::poisson_distribution<std::int64_t>(lambda)(rng))
                : 0.0;
      }
      y(g, i) = v;
    }
  }
  return y;
}

NormalFit resolve_fit(const ConjugateHierSpec& spec, const Eigen::MatrixXd& data) {
  if (spec.fit == FitMode::Known) return {spec.sigma, spec.tau, spec.mu0};
  const Eigen::Index G = data.rows();
  const Eigen::Index m = data.cols();
  const Eigen::VectorXd means = data.rowwise().mean();
  const double within =
      (data.colwise() - means).squaredNorm() / static_cast<double>(G * (m - 1));
  const double grand = means.mean();
  const double between = (means.array() - grand).square().sum() / static_cast<double>(G - 1);
  const double sigma2 = std::max(within, DBL_MIN);
  const double tau2 = std::max(between - sigma2 / static_cast<double>(m), 1e-6 * sigma2);
  return {std::sqrt(sigma2), std::sqrt(tau2), grand};
}

PitSample exact_loo_pit(const ConjugateHierSpec& spec, const Eigen::MatrixXd& data,
                        std::mt19937_64* jitter) {
  validate(spec);
  check_shape(spec, data);
  if (is_discrete(spec.dgp)) return count_pit(spec, data, false, need_jitter(jitter));
  return normal_pit(spec, data, false);
}

PitSample exact_posterior_pit(const ConjugateHierSpec& spec, const Eigen::MatrixXd& data,
                              std::mt19937_64* jitter) {
  validate(spec);
  check_shape(spec, data);
  if (is_discrete(spec.dgp)) return count_pit(spec, data, true, need_jitter(jitter));
  return normal_pit(spec, data, true);
}

PitSample spp_pit(const ConjugateHierSpec& spec, const Eigen::MatrixXd& data,
                  std::uint64_t draw_seed) {
  validate(spec);
  check_shape(spec, data);
  std::mt19937_64 rng(draw_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> u;
  u.reserve(spec.n());
  const double m = spec.m;

  if (!is_discrete(spec.dgp)) {
    const NormalFit fit = resolve_fit(spec, data);
    const double prior_prec = prior_precision(fit.tau);
    const double noise_prec = 1.0 / (fit.sigma * fit.sigma);
    const double prec = prior_prec + m * noise_prec;
    for (Eigen::Index g = 0; g < data.rows(); ++g) {
      const double prior_term = prior_prec > 0.0 ? prior_prec * fit.mu0 : 0.0;
      const double mean = (prior_term + noise_prec * group_sum(data, g)) / prec;
      const double mu_star = mean + normal(rng) / std::sqrt(prec);
      for (Eigen::Index i = 0; i < data.cols(); ++i) {
        const double z = (data(g, i) - mu_star) / fit.sigma;
        u.push_back(clamp_pit(specfun::normal_cdf(z)));
      }
    }
    return PitSample::continuous(std::move(u));
  }

  for (Eigen::Index g = 0; g < data.rows(); ++g) {
    const double s = group_sum(data, g);
    if (const auto* bb = std::get_if<BetaBinomialDgp>(&spec.dgp)) {
      const double theta =
          sample_beta(rng, kBetaPrior + s, kBetaPrior + m * static_cast<double>(bb->N) - s);
      for (Eigen::Index i = 0; i < data.cols(); ++i) {
        const std::int64_t y = as_count(data(g, i));
        const double hi = specfun::binom_cdf(y, bb->N, theta);
        const double lo = specfun::binom_cdf(y - 1, bb->N, theta);
        u.push_back(clamp_pit(randomized_pit_discrete(hi, std::min(lo, hi), uniform01(rng))));
      }
    } else {
      const double lambda = std::gamma_distribution<double>(
          kGammaShapePrior + s, 1.0 / (kGammaRatePrior + m))(rng);
      for (Eigen::Index i = 0; i < data.cols(); ++i) {
        const std::int64_t y = as_count(data(g, i));
        const double hi = poisson_cdf(y, lambda);
        const double lo = poisson_cdf(y - 1, lambda);
        u.push_back(clamp_pit(randomized_pit_discrete(hi, std::min(lo, hi), uniform01(rng))));
      }
    }
  }
  return PitSample::continuous(std::move(u));
}

Probability randomized_pit_discrete(double cdf_at_y, double cdf_at_y_minus_1, double v) {
  const Probability hi(cdf_at_y);
  const Probability lo(cdf_at_y_minus_1);
  const Probability w(v);
  if (lo.value() > hi.value()) {
    throw Error(ErrorCode::OrderingViolation, "F(y - 1) = " + std::to_string(lo.value()) +
                                                  " exceeds F(y) = " + std::to_string(hi.value()));
  }
  return Probability(lo + w * (hi - lo));
}

double clamp_pit(double u) { return std::clamp(u, DBL_MIN, std::nextafter(1.0, 0.0)); }

bool is_clamped(double u) { return u <= DBL_MIN || u >= std::nextafter(1.0, 0.0); }

double beta_binomial_cdf(std::int64_t k, std::int64_t N, double a, double b) {
  if (k < 0) return 0.0;
  if (k >= N) return 1.0;
  const double log_norm = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double Nd = static_cast<double>(N);
  double total = 0.0;
  for (std::int64_t j = 0; j <= k; ++j) {
    const double jd = static_cast<double>(j);
    const double log_choose = std::lgamma(Nd + 1.0) - std::lgamma(jd + 1.0) - std::lgamma(Nd - jd + 1.0);
    const double log_b = std::lgamma(jd + a) + std::lgamma(Nd - jd + b) - std::lgamma(Nd + a + b);
    total += std::exp(log_choose + log_b - log_norm);
  }
  return std::min(total, 1.0);
}

double negative_binomial_cdf(std::int64_t k, double shape, double rate) {
  if (k < 0) return 0.0;
  // Pr(Y <= k) = I_p(shape, k + 1) with p = rate / (rate + 1).
  return specfun::reg_inc_beta(rate / (rate + 1.0), shape, static_cast<double>(k) + 1.0);
}

double poisson_cdf(std::int64_t k, double lambda) {
  if (k < 0) return 0.0;
  if (!(lambda > 0.0)) return 1.0;
  const double log_lambda = std::log(lambda);
  double total = 0.0;
  for (std::int64_t j = 0; j <= k; ++j) {
    const double jd = static_cast<double>(j);
    total += std::exp(jd * log_lambda - lambda - std::lgamma(jd + 1.0));
  }
  return std::min(total, 1.0);
}

}  // namespace pitdep
