#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "menunet/core.hpp"

namespace menunet {

/// Known optimal mechanism (or just its revenue) for a distribution, possibly
/// under a menu-size cap or a symmetry restriction.
struct OptimalReference {
  std::string name;
  DistributionSpec spec;
  std::optional<Menu> menu;
  double opt_revenue = 0.0;
  std::optional<std::size_t> menu_size_cap;
  bool symmetric_only = false;
};

/// Uniform triangle {v1/c + v2 <= 1}, c >= 1. For c <= 4/3 the bundle at
/// sqrt(c/3); above that a (1/c, 1) lottery at 2/3 plus the bundle at
/// 2c/3 - sqrt(c(c-1))/3.
OptimalReference optimal_triangle(double c);

/// Price of the bundle in optimal_triangle(c) for c > 4/3.
double triangle_bundle_price(double c);
/// (2/27)(4 + c + sqrt(c(c-1))).
double triangle_revenue_formula(double c);

/// Optimal revenue on U[0,1] x [0,c] for c in {1, 1.5, 1.9, 2, 2.5}.
double optimal_rect_revenue(double c);
OptimalReference optimal_rect(double c);

/// U[0,1]^2 with at most three menu items: {Z, [(1,1), 5/6], [(1,0), 2/3]}.
OptimalReference optimal_3menu();
/// U[0,1]^2 with a symmetric menu of at most three items: the bundle at sqrt(6)/3.
OptimalReference optimal_symmetric_3menu();
/// U[0,1]^2 with at most two items: the bundle at sqrt(6)/3.
OptimalReference optimal_2menu();

/// Revenue of `menu` on ref.spec divided by the optimal revenue.
double optimality_ratio(const Menu& menu, const OptimalReference& ref);

nlohmann::json to_json(const OptimalReference& ref);

}  // namespace menunet
