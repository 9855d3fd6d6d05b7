#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <variant>

#include "pitdep/pointwise.hpp"
#include "pitdep/specfun.hpp"

namespace pitdep {

struct NormalDgp {};
struct StudentTDgp {
  double nu = 3.0;
};
// y = exp(mu_g + sigma_log eps).
struct LogNormalDgp {
  double sigma_log = 1.0;
};
// Density proportional to exp(-(|y - mu_g| / alpha)^beta).
struct GeneralizedNormalDgp {
  double alpha = 0.31;
  double beta = 2.0;
};
// y ~ Binomial(N, pi), pi ~ Beta(phi q_g, phi (1 - q_g)), q_g = logistic(mu_g).
struct BetaBinomialDgp {
  std::int64_t N = 10;
  double phi = 10.0;
};
// y ~ Poisson(lambda), lambda ~ Gamma(phi, mean exp(mu_g)).
struct NegBinomialDgp {
  double phi = 5.0;
};

using Dgp = std::variant<NormalDgp, StudentTDgp, LogNormalDgp, GeneralizedNormalDgp,
                         BetaBinomialDgp, NegBinomialDgp>;

bool is_discrete(const Dgp& dgp);

// Known: the fitted model uses sigma, tau and mu0 as given.
// Plugin: they are re-estimated from each data set (empirical Bayes moments).
enum class FitMode { Known, Plugin };

// Group effects mu_g ~ N(mu0, tau^2); within-group scale sigma. tau may be
// +inf for a flat prior on mu_g.
struct ConjugateHierSpec {
  int G = 50;
  int m = 5;
  double sigma = 1.0;
  double tau = 1.0;
  double mu0 = 0.0;
  Dgp dgp = NormalDgp{};
  FitMode fit = FitMode::Known;
  std::uint64_t seed = 1;

  std::size_t n() const noexcept { return static_cast<std::size_t>(G) * static_cast<std::size_t>(m); }
};

void validate(const ConjugateHierSpec& spec);

// G x m matrix of observations.
Eigen::MatrixXd simulate_data(const ConjugateHierSpec& spec, std::mt19937_64& rng);

// Normal-normal hyperparameters actually used to compute PITs.
struct NormalFit {
  double sigma = 1.0;
  double tau = 1.0;
  double mu0 = 0.0;
};

NormalFit resolve_fit(const ConjugateHierSpec& spec, const Eigen::MatrixXd& data);

// PIT values are listed group by group (index g * m + i) and clamped into
// [DBL_MIN, 1 - 2^-53]. Discrete DGPs are fitted with conjugate count models
// and randomized with draws from `jitter`.
PitSample exact_loo_pit(const ConjugateHierSpec& spec, const Eigen::MatrixXd& data,
                        std::mt19937_64* jitter = nullptr);
PitSample exact_posterior_pit(const ConjugateHierSpec& spec, const Eigen::MatrixXd& data,
                              std::mt19937_64* jitter = nullptr);
PitSample spp_pit(const ConjugateHierSpec& spec, const Eigen::MatrixXd& data,
                  std::uint64_t draw_seed);

// F(y - 1) + v (F(y) - F(y - 1)).
Probability randomized_pit_discrete(double cdf_at_y, double cdf_at_y_minus_1, double v);

// Clamps a PIT into the open interval used by the simulator.
double clamp_pit(double u);
bool is_clamped(double u);

// Samplers shared with the tests.
double sample_generalized_normal(std::mt19937_64& rng, double alpha, double beta);

// Predictive CDFs of the count models.
double beta_binomial_cdf(std::int64_t k, std::int64_t N, double a, double b);
double negative_binomial_cdf(std::int64_t k, double shape, double rate);
double poisson_cdf(std::int64_t k, double lambda);

}  // namespace pitdep
