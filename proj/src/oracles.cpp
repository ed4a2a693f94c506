#include "menunet/oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <variant>

#include <fmt/format.h>

#include "menunet/evaluator.hpp"

namespace menunet {

namespace {

using Wide = long double;

double narrow(Wide x) { return static_cast<double>(x); }

}  // namespace

double triangle_bundle_price(double c) {
  const Wide wc = c;
  return narrow(2.0L * wc / 3.0L - std::sqrt(wc * (wc - 1.0L)) / 3.0L);
}

double triangle_revenue_formula(double c) {
  const Wide wc = c;
  return narrow(2.0L / 27.0L * (4.0L + wc + std::sqrt(wc * (wc - 1.0L))));
}

OptimalReference optimal_triangle(double c) {
  if (!(c >= 1.0)) throw std::invalid_argument(fmt::format("optimal_triangle needs c >= 1, got {}", c));
  OptimalReference ref{fmt::format("triangle c={}", c), DistributionSpec::uniform_triangle(c),
                       std::nullopt, 0.0, std::nullopt, false};
  if (c <= 4.0 / 3.0) {
    const double price = narrow(std::sqrt(static_cast<Wide>(c) / 3.0L));
    ref.menu = Menu::with_exit(2, {{{1.0, 1.0}, price}});
    ref.opt_revenue = exact_revenue(*ref.menu, ref.spec);
  } else {
    ref.menu = Menu::with_exit(2, {{{narrow(1.0L / static_cast<Wide>(c)), 1.0}, narrow(2.0L / 3.0L)},
                                   {{1.0, 1.0}, triangle_bundle_price(c)}});
    ref.opt_revenue = triangle_revenue_formula(c);
  }
  return ref;
}

double optimal_rect_revenue(double c) {
  const auto is = [c](double x) { return std::abs(c - x) <= 1e-12; };
  if (is(1.0)) return narrow((12.0L + 2.0L * std::sqrt(2.0L)) / 27.0L);
  if (is(1.5)) return narrow((15.0L + 2.0L * std::sqrt(3.0L)) / 27.0L);
  if (is(1.9)) return narrow((17.4L + 2.0L * std::sqrt(3.8L)) / 27.0L);
  if (is(2.0)) return narrow(22.0L / 27.0L);
  if (is(2.5)) return narrow(1019.0L / 1080.0L);
  throw std::invalid_argument(fmt::format("no tabulated optimum for U[0,1]x[0,{}]", c));
}

OptimalReference optimal_rect(double c) {
  return {fmt::format("U[0,1]x[0,{}]", c), DistributionSpec::uniform_rect(1.0, c), std::nullopt,
          optimal_rect_revenue(c), std::nullopt, false};
}

OptimalReference optimal_3menu() {
  auto menu = Menu::with_exit(2, {{{1.0, 1.0}, narrow(5.0L / 6.0L)}, {{1.0, 0.0}, narrow(2.0L / 3.0L)}});
  return {"U[0,1]^2 menu size <= 3", DistributionSpec::uniform_rect(1.0, 1.0), std::move(menu),
          narrow(59.0L / 108.0L), 3, false};
}

OptimalReference optimal_symmetric_3menu() {
  auto menu = Menu::with_exit(2, {{{1.0, 1.0}, narrow(std::sqrt(6.0L) / 3.0L)}});
  return {"U[0,1]^2 symmetric menu size <= 3", DistributionSpec::uniform_rect(1.0, 1.0), std::move(menu),
          narrow(2.0L * std::sqrt(6.0L) / 9.0L), 3, true};
}

OptimalReference optimal_2menu() {
  auto ref = optimal_symmetric_3menu();
  ref.name = "U[0,1]^2 menu size <= 2";
  ref.menu_size_cap = 2;
  ref.symmetric_only = false;
  return ref;
}

double optimality_ratio(const Menu& menu, const OptimalReference& ref) {
  if (!(ref.opt_revenue > 0.0)) throw std::invalid_argument("reference revenue must be positive");
  return exact_revenue(menu, ref.spec) / ref.opt_revenue;
}

nlohmann::json to_json(const OptimalReference& ref) {
  nlohmann::json j = {{"name", ref.name},
                      {"distribution", to_json(ref.spec)},
                      {"opt_revenue", ref.opt_revenue},
                      {"symmetric_only", ref.symmetric_only}};
  j["menu"] = ref.menu ? to_json(*ref.menu) : nlohmann::json("revenue-only");
  j["menu_size_cap"] = ref.menu_size_cap ? nlohmann::json(*ref.menu_size_cap) : nlohmann::json(nullptr);
  return j;
}

}  // namespace menunet
