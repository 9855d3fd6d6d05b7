#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "pitdep/pointwise.hpp"

namespace pitdep {

// SharedFactor: latent z = F w / sqrt(n) + D^{1/2} eps with rows f_i =
//   sqrt(n) s e_i, e_i uniform on the half sphere {e : e_1 >= 0} in R^p, so
//   Sigma = F F^T / n + D has unit diagonal with D = 1 - s^2.
// Residual: z = sqrt(1 - s^2) eta + s r_i / sqrt(1 - h_ii), where r = (I - H) eps
//   and H projects onto a fixed n x p design (intercept plus Gaussian columns).
//   This mimics the negative, rank-p dependence of leave-one-out residuals.
enum class CopulaStructure { SharedFactor, Residual };

struct LowRankCopulaSpec {
  std::size_t n = 100;
  std::size_t p = 1;
  double loading_scale = 0.5;
  std::uint64_t seed = 1;
  CopulaStructure structure = CopulaStructure::SharedFactor;
};

void validate(const LowRankCopulaSpec& spec);

class CopulaGenerator {
 public:
  // Loadings (or the design) are drawn once from spec.seed.
  explicit CopulaGenerator(const LowRankCopulaSpec& spec);

  const LowRankCopulaSpec& spec() const noexcept { return spec_; }

  PitSample draw(std::mt19937_64& rng) const;

  // Implied correlation matrix of the latent Gaussian.
  Eigen::MatrixXd correlation() const;
  double mean_abs_correlation() const;

 private:
  LowRankCopulaSpec spec_;
  Eigen::MatrixXd basis_;     // unit loadings e_i (n x p), or orthonormal Q of the design
  Eigen::VectorXd leverage_;  // h_ii for the residual structure
};

// One draw using spec.seed for both loadings and the sample.
PitSample copula_dependent_uniforms(const LowRankCopulaSpec& spec);

// Bisection on loading_scale in [0, 1) so the implied mean absolute pairwise
// correlation hits `target`.
double calibrate_loading_scale(LowRankCopulaSpec spec, double target);

}  // namespace pitdep
