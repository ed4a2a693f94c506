#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "menunet/duality.hpp"
#include "menunet/evaluator.hpp"
#include "menunet/oracles.hpp"

using namespace menunet;

namespace {

Menu perturbed(const Menu& menu, double delta) {
  std::vector<MenuItem> offers(menu.items().begin() + 1, menu.items().end());
  offers.back().price += delta;
  return Menu::with_exit(2, offers);
}

double max_gap(const std::vector<RegionBalance>& regs) {
  double g = 0.0;
  for (const auto& r : regs) g = std::max(g, std::abs(r.gap()));
  return g;
}

}  // namespace

TEST_CASE("measures have zero total mass") {
  const auto two = build_measures(2.0);
  CHECK(two.hypotenuse_length() == doctest::Approx(std::sqrt(5.0)));
  CHECK(two.boundary_density == doctest::Approx(2 / std::sqrt(5.0)));
  CHECK(two.interior_density == doctest::Approx(3.0));
  CHECK(two.boundary_total() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(two.interior_total() == doctest::Approx(3.0).epsilon(1e-14));

  const auto one = build_measures(1.0);
  CHECK(one.boundary_density == doctest::Approx(2 / std::sqrt(2.0)));
  CHECK(one.interior_density == doctest::Approx(6.0));

  for (double c : {1.0, 1.3, 2.0, 2.5, 7.0}) {
    const auto m = build_measures(c);
    CHECK(std::abs(m.origin_mass + m.boundary_total() - m.interior_total()) < 1e-9);
  }
  CHECK_THROWS_AS(build_measures(0.5), std::invalid_argument);
}

TEST_CASE("optimal menus balance on every region") {
  for (double c : {1.2, 1.5, 2.0, 2.5, 3.0}) {
    const auto regs = region_balance(*optimal_triangle(c).menu, c);
    CHECK(regs.size() == optimal_triangle(c).menu->size());
    CHECK(max_gap(regs) < 1e-6);
  }
}

TEST_CASE("region moments at c = 2") {
  const double c = 2.0;
  const auto regs = region_balance(*optimal_triangle(c).menu, c);
  REQUIRE(regs.size() == 3);
  // the lottery region: (1/9)(8 - 6 sqrt(c/(c-1)) + 5c - 4 sqrt(c(c-1)))
  const double lottery = (8 - 6 * std::sqrt(c / (c - 1)) + 5 * c - 4 * std::sqrt(c * (c - 1))) / 9;
  CHECK(std::abs(regs[1].plus_moment - lottery) < 1e-6);
  // the bundle region receives the rest of the hypotenuse: 3 - lottery
  // (the whole hypotenuse has plus-moment mu_boundary * |v|_1 = 2 * 3/2)
  CHECK(std::abs(regs[2].plus_moment - (9 + 10 * std::sqrt(2.0)) / 9) < 1e-6);
  CHECK(regs[0].plus_moment == 0.0);
}

TEST_CASE("dual objective equals revenue at the optimum") {
  for (double c : {1.5, 2.0, 2.5, 3.0}) {
    const Menu menu = *optimal_triangle(c).menu;
    const double dual = dual_objective(menu, c);
    CHECK(std::abs(dual - exact_revenue(menu, DistributionSpec::uniform_triangle(c))) < 1e-6);
    CHECK(std::abs(dual - triangle_revenue_formula(c)) < 1e-6);
  }
  CHECK(std::abs(dual_objective(*optimal_triangle(2.0).menu, 2.0) - (12 + 2 * std::sqrt(2.0)) / 27) < 1e-6);
  CHECK(std::abs(dual_objective(*optimal_triangle(3.0).menu, 3.0) - 2.0 / 27 * (7 + std::sqrt(6.0))) < 1e-6);
}

TEST_CASE("quadrature converges") {
  for (double c : {1.5, 2.0, 2.5}) {
    const Menu menu = *optimal_triangle(c).menu;
    const auto coarse = region_balance(menu, c, kDefaultQuadN / 2);
    const auto fine = region_balance(menu, c, kDefaultQuadN);
    for (std::size_t i = 0; i < fine.size(); ++i) {
      CHECK(std::abs(coarse[i].mu_plus - fine[i].mu_plus) < 4 * kCertificateTol);
      CHECK(std::abs(coarse[i].mu_minus - fine[i].mu_minus) < 4 * kCertificateTol);
    }
  }
  CHECK_THROWS_AS(region_balance(*optimal_triangle(2.0).menu, 2.0, 50), std::invalid_argument);
}

TEST_CASE("the optimal dual bounds every other menu") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double c : {1.5, 2.0, 2.5}) {
    const double bound = dual_objective(*optimal_triangle(c).menu, c);
    const auto spec = DistributionSpec::uniform_triangle(c);
    for (int t = 0; t < 100; ++t) {
      std::vector<MenuItem> offers;
      for (int i = 0; i < 1 + t % 5; ++i) offers.push_back({{u(rng), u(rng)}, c * u(rng)});
      CHECK(exact_revenue(Menu::with_exit(2, offers), spec) <= bound + 1e-9);
    }
  }
}

TEST_CASE("certificates pass for optima and fail for perturbations") {
  for (double c : {1.2, 1.5, 2.0, 2.5, 3.0}) {
    const Menu menu = *optimal_triangle(c).menu;
    const auto cert = certify(menu, c);
    CHECK(cert.pass);
    CHECK(std::abs(cert.dual_objective - cert.revenue) < kCertificateTol);

    const auto bad = certify(perturbed(menu, 0.05), c);
    CHECK_FALSE(bad.pass);
    CHECK(max_gap(bad.regions) > 1e-3);
  }
}

TEST_CASE("certificate JSON") {
  const auto cert = certify(*optimal_triangle(2.0).menu, 2.0);
  const auto j = to_json(cert);
  CHECK(j["c"] == 2.0);
  CHECK(j["verdict"] == "pass");
  REQUIRE(j["regions"].size() == 3);
  for (const auto& r : j["regions"]) {
    for (const char* key : {"i", "mu_plus", "mu_minus", "gap"}) CHECK(r.contains(key));
  }
  CHECK(j["dual_objective"] == cert.dual_objective);
  CHECK(j["revenue"] == cert.revenue);
  CHECK(to_json(certify(perturbed(*optimal_triangle(2.0).menu, 0.05), 2.0))["verdict"] == "fail");
}
