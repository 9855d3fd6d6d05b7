#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "pitdep/baselines.hpp"
#include "pitdep/error.hpp"

using namespace pitdep;

TEST_CASE("KS examples") {
  CHECK(ks_test(PitSample::continuous({0.5})).statistic == 0.5);
  std::vector<double> spaced(10);
  for (int i = 1; i <= 10; ++i) spaced[i - 1] = (2.0 * i - 1.0) / 20.0;
  CHECK(std::fabs(ks_test(PitSample::continuous(spaced)).statistic - 0.05) < 1e-15);
  CHECK_THROWS_AS(ks_test(PitSample::continuous({})), Error);
}

TEST_CASE("Kolmogorov survival function matches reference values") {
  // scipy.stats.kstwobign.sf, see tests/oracles/freeze_values.py.
  const std::pair<double, double> cases[] = {
      {0.2, 0.999999999999495}, {0.5, 0.9639452436648751},  {0.8, 0.5441424115741981},
      {1.0, 0.26999967167735456}, {1.3581, 0.0499996304316674}, {2.0, 0.0006709252557796953},
      {3.0, 3.045995948942526e-08},
  };
  for (const auto& [lambda, expected] : cases) {
    CAPTURE(lambda);
    CHECK(std::fabs(kolmogorov_sf(lambda) - expected) <= 1e-12);
  }
  CHECK(kolmogorov_sf(0.0) == 1.0);
}

TEST_CASE("KS statistic is permutation invariant and bounded") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t n : {1u, 5u, 80u}) {
    std::vector<double> u(n);
    for (double& v : u) v = unif(rng);
    const double d = ks_statistic(u);
    std::shuffle(u.begin(), u.end(), rng);
    CHECK(ks_statistic(u) == d);
    CHECK(d >= 1.0 / (2.0 * n) - 1e-15);
    CHECK(d <= 1.0);
  }
}

TEST_CASE("AD examples") {
  CHECK(std::fabs(ad_test(PitSample::continuous({0.5})).statistic - (2.0 * std::log(2.0) - 1.0)) <
        1e-15);
  for (int n : {20, 50}) {
    std::vector<double> u(n);
    for (int i = 1; i <= n; ++i) u[i - 1] = i / (10.0 * n);
    CHECK(ad_test(PitSample::continuous(u)).global_p < 0.01);
  }
  std::vector<double> spaced(100);
  for (int i = 1; i <= 100; ++i) spaced[i - 1] = (i - 0.5) / 100.0;
  CHECK(ad_statistic(spaced) < 1.0);
  CHECK_THROWS_AS(ad_test(PitSample::continuous({0.0, 0.5})), Error);
  // Asymptotic 5% critical value of A^2.
  CHECK(std::fabs(ad_sf(2.492, 1000) - 0.05) < 0.001);
  CHECK(std::fabs(ad_sf(3.857, 1000) - 0.01) < 0.0005);
}

TEST_CASE("KS and AD type-I error under i.i.d. uniforms") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int reps = 10000;
  int ks = 0, ad = 0;
  std::vector<double> u(200);
  for (int s = 0; s < reps; ++s) {
    for (double& v : u) {
      do v = unif(rng);
      while (v == 0.0);
    }
    const auto sample = PitSample::continuous(u);
    ks += ks_test(sample).reject;
    ad += ad_test(sample).reject;
  }
  CHECK(std::fabs(ks / double(reps) - 0.05) <= 0.01);
  CHECK(std::fabs(ad / double(reps) - 0.05) <= 0.01);
}

TEST_CASE("KS calibration at larger n stays within 3 standard errors") {
  std::mt19937_64 rng(78);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int reps = 4000;
  int ks = 0;
  std::vector<double> u(1000);
  for (int s = 0; s < reps; ++s) {
    for (double& v : u) v = unif(rng);
    ks += ks_test(PitSample::continuous(u)).reject;
  }
  CHECK(std::fabs(ks / double(reps) - 0.05) <= 3 * std::sqrt(0.05 * 0.95 / reps));
}
