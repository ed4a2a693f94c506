#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "menunet/core.hpp"
#include "menunet/geometry.hpp"

namespace menunet {

/// Closure of the set of support points where `item` is the hard-buyer choice.
struct ResponseRegion {
  std::size_t item = 0;
  Polygon polygon;
  double mass = 0.0;
};

/// One region per menu item (possibly empty), by clipping the support against
/// the dominance half-planes u_item(v) >= u_j(v). Two items with the same
/// allocation are resolved by the hard-buyer tie rule, so exact duplicates
/// leave the later copy empty. Two items only; uniform rectangle or triangle;
/// additive or unit-demand utility.
std::vector<ResponseRegion> regions(const Menu& menu, const DistributionSpec& spec,
                                    ValuationKind kind = ValuationKind::Additive);

/// Sum over items of price times region mass.
double exact_revenue(const Menu& menu, const DistributionSpec& spec,
                     ValuationKind kind = ValuationKind::Additive);

/// Chosen item per grid point under the hard buyer.
std::vector<std::size_t> grid_choices(const Menu& menu, const ValueGrid& grid, ValuationKind kind,
                                      int threads = 1);

/// Expected payment on the grid under the hard buyer; works for every valuation kind.
double grid_revenue(const Menu& menu, const ValueGrid& grid, ValuationKind kind, int threads = 1);

/// [{item, price, allocation, mass, polygon}]
nlohmann::json regions_to_json(const Menu& menu, const std::vector<ResponseRegion>& regs);

std::string region_svg(const Menu& menu, const DistributionSpec& spec,
                       ValuationKind kind = ValuationKind::Additive);
/// Grid-based picture for cases without exact regions (combinatorial utility,
/// custom densities): each grid cell filled with the color of its chosen item.
std::string choice_svg(const Menu& menu, const DistributionSpec& spec, const ValueGrid& grid,
                       ValuationKind kind);
void region_plot(const Menu& menu, const DistributionSpec& spec, const std::string& path,
                 ValuationKind kind = ValuationKind::Additive);

}  // namespace menunet
