#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "menunet/evaluator.hpp"
#include "menunet/oracles.hpp"

using namespace menunet;

namespace {

Menu bundle(double p) { return Menu::with_exit(2, {{{1.0, 1.0}, p}}); }

Menu random_menu(std::mt19937_64& rng, std::size_t items, double max_price) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MenuItem> offers;
  for (std::size_t i = 0; i < items; ++i) offers.push_back({{u(rng), u(rng)}, max_price * u(rng)});
  return Menu::with_exit(2, offers);
}

double total_mass(const std::vector<ResponseRegion>& regs) {
  double s = 0.0;
  for (const auto& r : regs) s += r.mass;
  return s;
}

}  // namespace

TEST_CASE("bundle regions on the unit square") {
  const auto regs = regions(bundle(0.8), DistributionSpec::uniform_rect(1, 1));
  REQUIRE(regs.size() == 2);
  CHECK(regs[0].mass == doctest::Approx(0.32).epsilon(1e-14));
  CHECK(regs[1].mass == doctest::Approx(0.68).epsilon(1e-14));
  CHECK(regs[0].polygon.size() == 3);
}

TEST_CASE("bundle revenue closed form") {
  const auto spec = DistributionSpec::uniform_rect(1, 1);
  for (double p : {0.1, 0.5, 0.8, 1.0}) {
    CHECK(exact_revenue(bundle(p), spec) == doctest::Approx(p * (1 - p * p / 2)).epsilon(1e-14));
  }
  CHECK(std::abs(exact_revenue(bundle(std::sqrt(2.0 / 3)), spec) - 2 * std::sqrt(6.0) / 9) < 1e-12);
  const Menu three_item = Menu::with_exit(2, {{{1.0, 1.0}, 5.0 / 6}, {{1.0, 0.0}, 2.0 / 3}});
  CHECK(std::abs(exact_revenue(three_item, spec) - 59.0 / 108) < 1e-12);
}

TEST_CASE("triangle regions match the closed-form masses") {
  for (double c : {1.5, 2.0, 2.5, 3.0}) {
    const auto spec = DistributionSpec::uniform_triangle(c);
    const auto regs = regions(optimal_triangle(c).menu.value(), spec);
    REQUIRE(regs.size() == 3);
    const double yd = std::sqrt(c / (c - 1)) / 3;
    const double xd = 2 * c / 3 - std::sqrt(c * (c - 1)) / 3 - yd;
    CHECK(std::abs(regs[1].mass - (2 / c) * (xd / 3)) < 1e-12);
    CHECK(std::abs(regs[2].mass - (2 / c) * ((c / 2) * (1.0 / 3 + yd) * (1.0 / 3 + yd) - yd * yd / 2)) < 1e-12);
    CHECK(std::abs(exact_revenue(optimal_triangle(c).menu.value(), spec) - triangle_revenue_formula(c)) < 1e-12);
  }
}

TEST_CASE("regions tile the support") {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 200; ++t) {
    const double c = 1.0 + 2.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto spec = t % 2 ? DistributionSpec::uniform_triangle(c) : DistributionSpec::uniform_rect(1.0, c);
    const Menu menu = random_menu(rng, 1 + t % 9, 1.5);
    for (auto kind : {ValuationKind::Additive, ValuationKind::UnitDemand}) {
      const auto regs = regions(menu, spec, kind);
      CHECK(regs.size() == menu.size());
      CHECK(total_mass(regs) == doctest::Approx(1.0).epsilon(1e-9));
      for (const auto& r : regs) {
        CHECK(r.mass >= 0.0);
        CHECK(signed_area(r.polygon) >= 0.0);
      }
    }
    // pairwise interiors are disjoint: a point well inside one region is
    // never strictly inside another
    const auto regs = regions(menu, spec);
    for (const auto& r : regs) {
      if (r.mass < 1e-6) continue;
      const Point2 g = centroid(r.polygon);
      const double v[2] = {g.x, g.y};
      const auto u = menu_utility(menu, v, ValuationKind::Additive);
      for (std::size_t j = 0; j < u.size(); ++j) CHECK(u[r.item] >= u[j] - 1e-12);
    }
  }
}

TEST_CASE("exact revenue ignores item order and empty items") {
  std::mt19937_64 rng(5);
  const auto spec = DistributionSpec::uniform_triangle(2);
  for (int t = 0; t < 50; ++t) {
    const Menu menu = random_menu(rng, 6, 1.5);
    std::vector<MenuItem> offers(menu.items().begin() + 1, menu.items().end());
    std::shuffle(offers.begin(), offers.end(), rng);
    const double rev = exact_revenue(menu, spec);
    CHECK(exact_revenue(Menu::with_exit(2, offers), spec) == doctest::Approx(rev).epsilon(1e-12));

    const auto regs = regions(menu, spec);
    std::vector<MenuItem> kept;
    for (std::size_t i = 1; i < menu.size(); ++i) {
      if (regs[i].mass > 0.0) kept.push_back(menu[i]);
    }
    CHECK(std::abs(exact_revenue(Menu::with_exit(2, kept), spec) - rev) <= 1e-12);
  }
}

TEST_CASE("duplicated items: the later copy gets nothing") {
  const Menu menu = Menu::with_exit(2, {{{1.0, 1.0}, 0.8}, {{1.0, 1.0}, 0.8}});
  const auto regs = regions(menu, DistributionSpec::uniform_rect(1, 1));
  CHECK(regs[1].mass == doctest::Approx(0.68));
  CHECK(regs[2].mass == 0.0);
  CHECK(regs[2].polygon.empty());
}

TEST_CASE("the single-good item touches v2 = 0 at its price") {
  const Menu three_item = Menu::with_exit(2, {{{1.0, 1.0}, 5.0 / 6}, {{1.0, 0.0}, 2.0 / 3}});
  const auto regs = regions(three_item, DistributionSpec::uniform_rect(1, 1));
  const auto& poly = regs[2].polygon;
  const bool touches = std::any_of(poly.begin(), poly.end(), [](Point2 p) {
    return std::abs(p.y) < 1e-12 && std::abs(p.x - 2.0 / 3) < 1e-12;
  });
  CHECK(touches);
}

TEST_CASE("unsupported inputs are rejected") {
  CustomDensity t{1.0, 1.0, 1, 1, {1.0}};
  CHECK_THROWS_AS(regions(bundle(0.5), DistributionSpec::custom(t)), std::invalid_argument);
  CHECK_THROWS_AS(regions(bundle(0.5), DistributionSpec::uniform_rect(1, 1), ValuationKind::Combinatorial),
                  std::invalid_argument);
}

TEST_CASE("grid revenue") {
  const auto spec = DistributionSpec::uniform_rect(1, 1);
  const ValueGrid g100 = make_grid(spec, 100);
  CHECK(grid_revenue(Menu::with_exit(2, {{{1.0, 1.0}, 0.0}}), g100, ValuationKind::Additive) == 0.0);
  CHECK(std::abs(grid_revenue(bundle(0.8), g100, ValuationKind::Additive) - 0.544) <= 2.0 / 100);
  // mass of {v1 + v2 + v1 v2 >= 1}: Monte-Carlo estimate from 10^6 samples
  CHECK(std::abs(grid_revenue(bundle(1.0), g100, ValuationKind::Combinatorial) - 0.614033) < 3e-3);
  CHECK(grid_revenue(bundle(0.8), g100, ValuationKind::Additive, 1) ==
        grid_revenue(bundle(0.8), g100, ValuationKind::Additive, 4));
}

TEST_CASE("grid revenue converges to exact revenue") {
  // At a single price the error oscillates with the offset of the line
  // v1 + v2 = p from the cell centers, so track the worst case over a sweep
  // of bundle prices.
  const auto spec = DistributionSpec::uniform_rect(1, 1);
  double prev = 1.0;
  for (std::size_t n : {25u, 50u, 100u, 200u}) {
    const ValueGrid grid = make_grid(spec, n);
    double worst = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double p = 0.05 + 1.9 * k / 200.0;
      const Menu menu = bundle(p);
      const double err = std::abs(grid_revenue(menu, grid, ValuationKind::Additive) - exact_revenue(menu, spec));
      // price times the mass of the cells the line crosses (about 2N of N^2)
      CHECK(err <= p * 2.0 / n);
      worst = std::max(worst, err);
    }
    CHECK(worst < prev);
    prev = worst;
  }
}

TEST_CASE("region JSON and SVG") {
  const auto spec = DistributionSpec::uniform_triangle(2);
  const Menu menu = optimal_triangle(2).menu.value();
  const auto regs = regions(menu, spec);
  const auto j = regions_to_json(menu, regs);
  REQUIRE(j.size() == 3);
  CHECK(j[2]["price"] == menu[2].price);
  CHECK(j[1]["mass"] == regs[1].mass);
  CHECK(j[1]["polygon"].size() == regs[1].polygon.size());

  const std::string svg = region_svg(menu, spec);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  const auto count = [](const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
  };
  // three filled regions, the support outline and one legend swatch per item
  CHECK(count(svg, "<path") == 4);
  CHECK(count(svg, "fill=\"none\"") == 1);
  CHECK(count(svg, "item ") == 3);

  const std::string lone = region_svg(Menu::with_exit(2, {}), spec);
  CHECK(count(lone, "<path") == 2);
  CHECK(count(lone, "item ") == 1);

  const auto path = std::filesystem::temp_directory_path() / "menunet_regions_test.svg";
  region_plot(menu, spec, path.string());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == svg);
  std::filesystem::remove(path);
}
