#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "pitdep/error.hpp"
#include "pitdep/influence.hpp"
#include "support/shapley_oracle.hpp"

using namespace pitdep;

TEST_CASE("shapley examples") {
  CHECK(shapley_values({7.3}) == std::vector<double>{7.3});
  const auto two = shapley_values({2.0, 0.0});
  CHECK(two[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(two[1] == doctest::Approx(-0.5).epsilon(1e-15));
  for (double v : shapley_values({1.0, 1.0, 1.0})) CHECK(std::fabs(v - 1.0 / 3.0) < 1e-15);
  CHECK_THROWS_AS(shapley_values({1.0, INFINITY}), Error);
  CHECK_THROWS_AS(shapley_values({}), Error);
}

TEST_CASE("closed form equals enumeration of all orderings for n <= 8") {
  std::mt19937_64 rng(8);
  std::cauchy_distribution<double> cauchy;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> t(n);
      for (double& v : t) v = cauchy(rng);
      const auto closed = shapley_values(t);
      const auto brute = testsupport::shapley_by_enumeration(t);
      for (std::size_t i = 0; i < n; ++i) {
        CAPTURE(n);
        CHECK(std::fabs(closed[i] - brute[i]) <= 1e-9 * std::max(1.0, std::fabs(brute[i])));
      }
    }
  }
}

TEST_CASE("efficiency, symmetry and slope") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  for (std::size_t n : {2u, 17u, 1000u, 10000u}) {
    std::vector<double> t(n);
    for (double& v : t) v = normal(rng);
    t[1] = t[0];
    const auto phi = shapley_values(t);
    const double total = std::accumulate(phi.begin(), phi.end(), 0.0);
    const double mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n);
    CHECK(std::fabs(total - mean) <= 1e-9);
    CHECK(std::fabs(phi[0] - phi[1]) <= 1e-12);

    auto bumped = t;
    const double h = 0.5;
    bumped[0] += h;
    const double slope = (shapley_values(bumped)[0] - phi[0]) / h;
    CHECK(slope == doctest::Approx(harmonic_number(n) / static_cast<double>(n)).epsilon(1e-9));
  }
}

TEST_CASE("influential region") {
  CHECK(influential_region({1.5, -0.5}, 0.0) == std::set<std::size_t>{0});
  CHECK(influential_region({1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0 / 3).empty());
  CHECK(influential_region({0.9, 0.2, -0.1}, 0.45) == std::set<std::size_t>{0});
  CHECK(auto_gamma({0.9, 0.2, -0.1}, 0.2, 0.05) == 0.45);
  CHECK(auto_gamma({0.9, 0.2, -0.1}, 0.01, 0.05) == 0.0);
  CHECK(auto_gamma({-1.0, -2.0}, 0.5, 0.05) == 0.0);
  CHECK_THROWS_AS(influential_region({0.9, 0.2}, 1.0), Error);
  CHECK_THROWS_AS(influential_region({0.9, 0.2}, -0.1), Error);
  CHECK(influential_region({-0.3, -0.2}, 0.0).empty());

  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<double> phi(200);
  for (double& v : phi) v = normal(rng);
  const double top = *std::max_element(phi.begin(), phi.end());
  std::set<std::size_t> previous = influential_region(phi, 0.0);
  for (double g = 0.05; g <= top; g += 0.05) {
    const auto current = influential_region(phi, g);
    CHECK(std::includes(previous.begin(), previous.end(), current.begin(), current.end()));
    previous = current;
  }
}

TEST_CASE("ecdf plot data") {
  const auto s = PitSample::continuous({0.75, 0.25});
  const auto r = potc_pointwise(s);
  const auto pts = ecdf_plot_data(s, r, {});
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].x == 0.25);
  CHECK(pts[0].ecdf == 0.5);
  CHECK(pts[0].tilted == 0.25);
  CHECK(pts[1].x == 0.75);
  CHECK(pts[1].ecdf == 1.0);
  CHECK(pts[1].tilted == 0.25);
  CHECK(!pts[0].highlighted);

  const auto one = PitSample::continuous({0.4});
  const auto p1 = ecdf_plot_data(one, potc_pointwise(one), {0});
  CHECK(p1[0].ecdf == 1.0);
  CHECK(std::fabs(p1[0].tilted - 0.6) < 1e-15);
  CHECK(p1[0].highlighted);

  // PIET-C highlights by input position; POT-C by sorted position.
  const auto pietc = pietc_pointwise(s, NormalReference{});
  const auto hp = ecdf_plot_data(s, pietc, {0});
  CHECK(hp[1].highlighted);
  CHECK(!hp[0].highlighted);
  const auto hs = ecdf_plot_data(s, r, {0});
  CHECK(hs[0].highlighted);

  CHECK_THROWS_AS(ecdf_plot_data(PitSample::continuous({0.1, 0.2, 0.3}), r, {}), Error);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u(300);
  for (double& v : u) v = unif(rng);
  const auto big = PitSample::continuous(u);
  for (const auto& pt : ecdf_plot_data(big, potc_pointwise(big), {})) {
    CHECK(pt.tilted >= -1.0);
    CHECK(pt.tilted <= 1.0);
  }
}

TEST_CASE("analyze_influence ties the pieces together") {
  std::vector<double> u(40);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.5 * (i + 0.5) / u.size();
  const auto s = PitSample::continuous(u);
  const auto r = potc_pointwise(s);
  const auto rep = analyze_influence(s, r, Combiner::TCCT, 0.05);
  const double p_star = tcct(r.p_values).p_star;
  CHECK(p_star <= 0.05);
  CHECK(rep.gamma == 0.0);
  CHECK(rep.grand_value == doctest::Approx(tcct(r.p_values).statistic).epsilon(1e-12));
  CHECK(std::accumulate(rep.phi.begin(), rep.phi.end(), 0.0) ==
        doctest::Approx(rep.grand_value).epsilon(1e-9));
  std::size_t highlighted = 0;
  for (const auto& pt : rep.ecdf_points) highlighted += pt.highlighted;
  CHECK(highlighted == rep.influential.size());
  CHECK(!rep.influential.empty());
}
