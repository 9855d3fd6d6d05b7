#include "pitdep/copula.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pitdep/error.hpp"
#include "pitdep/pitlab.hpp"
#include "pitdep/specfun.hpp"

namespace pitdep {
namespace {

constexpr int kBisectionSteps = 60;

}  // namespace

void validate(const LowRankCopulaSpec& spec) {
  if (spec.n < 2) throw Error(ErrorCode::Config, "copula needs n >= 2");
  if (spec.p < 1) throw Error(ErrorCode::Config, "copula needs p >= 1");
  if (!(spec.loading_scale >= 0.0)) {
    throw Error(ErrorCode::Config, "loading_scale must be nonnegative");
  }
  if (spec.loading_scale >= 1.0) {
    throw Error(ErrorCode::Domain, "loading_scale " + std::to_string(spec.loading_scale) +
                                       " leaves a nonpositive diagonal D = 1 - s^2");
  }
  if (spec.structure == CopulaStructure::Residual && spec.p >= spec.n) {
    throw Error(ErrorCode::Config, "residual copula needs p < n");
  }
}

CopulaGenerator::CopulaGenerator(const LowRankCopulaSpec& spec) : spec_(spec) {
  validate(spec_);
  const auto n = static_cast<Eigen::Index>(spec_.n);
  const auto p = static_cast<Eigen::Index>(spec_.p);
  std::mt19937_64 rng(spec_.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd raw(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < p; ++k) raw(i, k) = normal(rng);
  }
  if (spec_.structure == CopulaStructure::SharedFactor) {
    basis_ = raw;
    for (Eigen::Index i = 0; i < n; ++i) {
      basis_(i, 0) = std::fabs(basis_(i, 0));
      basis_.row(i).normalize();
    }
    return;
  }
  raw.col(0).setOnes();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  basis_ = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  leverage_ = basis_.rowwise().squaredNorm();
  if ((leverage_.array() >= 1.0 - 1e-12).any()) {
    throw Error(ErrorCode::Domain, "residual copula design has a leverage-one row");
  }
}

PitSample CopulaGenerator::draw(std::mt19937_64& rng) const {
  const auto n = static_cast<Eigen::Index>(spec_.n);
  const auto p = static_cast<Eigen::Index>(spec_.p);
  const double s = spec_.loading_scale;
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  if (spec_.structure == CopulaStructure::SharedFactor) {
    Eigen::VectorXd w(p);
    for (Eigen::Index k = 0; k < p; ++k) w(k) = normal(rng);
    const double d = std::sqrt(1.0 - s * s);
    // F w / sqrt(n) with F = sqrt(n) s E reduces to s E w.
    z = s * (basis_ * w);
    for (Eigen::Index i = 0; i < n; ++i) z(i) += d * normal(rng);
  } else {
    Eigen::VectorXd eps(n), eta(n);
    for (Eigen::Index i = 0; i < n; ++i) eps(i) = normal(rng);
    for (Eigen::Index i = 0; i < n; ++i) eta(i) = normal(rng);
    const Eigen::VectorXd r = eps - basis_ * (basis_.transpose() * eps);
    const double d = std::sqrt(1.0 - s * s);
    z = d * eta + s * (r.array() / (1.0 - leverage_.array()).sqrt()).matrix();
  }
  std::vector<double> u(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = clamp_pit(specfun::normal_cdf(z(i)));
  return PitSample::continuous(std::move(u));
}

Eigen::MatrixXd CopulaGenerator::correlation() const {
  const auto n = static_cast<Eigen::Index>(spec_.n);
  const double s2 = spec_.loading_scale * spec_.loading_scale;
  Eigen::MatrixXd c(n, n);
  if (spec_.structure == CopulaStructure::SharedFactor) {
    c = s2 * (basis_ * basis_.transpose());
  } else {
    const Eigen::MatrixXd residual =
        Eigen::MatrixXd::Identity(n, n) - basis_ * basis_.transpose();
    const Eigen::VectorXd scale = (1.0 - leverage_.array()).sqrt().inverse();
    c = s2 * (scale.asDiagonal() * residual * scale.asDiagonal());
  }
  c.diagonal().setOnes();
  return c;
}

double CopulaGenerator::mean_abs_correlation() const {
  const Eigen::MatrixXd c = correlation();
  const double n = static_cast<double>(spec_.n);
  return (c.cwiseAbs().sum() - n) / (n * (n - 1.0));
}

PitSample copula_dependent_uniforms(const LowRankCopulaSpec& spec) {
  const CopulaGenerator gen(spec);
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  return gen.draw(rng);
}

double calibrate_loading_scale(LowRankCopulaSpec spec, double target) {
  if (!(target >= 0.0)) throw Error(ErrorCode::Config, "target correlation must be >= 0");
  spec.loading_scale = std::nextafter(1.0, 0.0);
  const double reachable = CopulaGenerator(spec).mean_abs_correlation();
  if (target >= reachable) {
    throw Error(ErrorCode::Domain, "target correlation " + std::to_string(target) +
                                       " not reachable; maximum is " + std::to_string(reachable));
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int step = 0; step < kBisectionSteps; ++step) {
    spec.loading_scale = 0.5 * (lo + hi);
    if (CopulaGenerator(spec).mean_abs_correlation() < target) {
      lo = spec.loading_scale;
    } else {
      hi = spec.loading_scale;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace pitdep
