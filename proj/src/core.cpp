#include "menunet/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

namespace menunet {

std::string to_string(ValuationKind kind) {
  switch (kind) {
    case ValuationKind::Additive:
      return "additive";
    case ValuationKind::Combinatorial:
      return "combinatorial";
    case ValuationKind::UnitDemand:
      return "unit_demand";
  }
  return "unknown";
}

ValuationKind valuation_from_string(const std::string& name) {
  if (name == "additive") return ValuationKind::Additive;
  if (name == "combinatorial") return ValuationKind::Combinatorial;
  if (name == "unit_demand" || name == "unit-demand") return ValuationKind::UnitDemand;
  throw std::invalid_argument(fmt::format("unknown valuation kind '{}'", name));
}

bool MenuItem::is_exit() const {
  return price == 0.0 &&
         std::all_of(allocation.begin(), allocation.end(), [](double x) { return x == 0.0; });
}

Menu::Menu(std::size_t m, std::vector<MenuItem> items) : m_(m), items_(std::move(items)) {
  if (m_ == 0) throw std::invalid_argument("menu dimension must be positive");
  if (items_.empty() || items_.front().allocation.size() != m_ || !items_.front().is_exit()) {
    throw std::invalid_argument("menu must start with the exit item [(0,...,0), 0]");
  }
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const MenuItem& item = items_[i];
    if (item.allocation.size() != m_) {
      throw std::invalid_argument(
          fmt::format("menu item {} has dimension {}, expected {}", i, item.allocation.size(), m_));
    }
    for (double x : item.allocation) {
      if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument(fmt::format("menu item {} allocation {} outside [0,1]", i, x));
      }
    }
    if (!std::isfinite(item.price) || item.price < 0.0) {
      throw std::invalid_argument(fmt::format("menu item {} has invalid price {}", i, item.price));
    }
    if (i > 0 && item.is_exit()) {
      throw std::invalid_argument(fmt::format("menu item {} duplicates the exit item", i));
    }
  }
}

Menu Menu::with_exit(std::size_t m, std::vector<MenuItem> offers) {
  std::vector<MenuItem> items;
  items.reserve(offers.size() + 1);
  items.push_back({std::vector<double>(m, 0.0), 0.0});
  for (auto& o : offers) items.push_back(std::move(o));
  return Menu(m, std::move(items));
}

double Menu::max_price() const {
  double best = 0.0;
  for (const auto& item : items_) best = std::max(best, item.price);
  return best;
}

nlohmann::json to_json(const Menu& menu) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : menu.items()) {
    items.push_back({{"x", item.allocation}, {"p", item.price}});
  }
  return {{"m", menu.dim()}, {"items", items}};
}

Menu menu_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("m") || !j.contains("items")) {
    throw std::invalid_argument("menu JSON needs fields 'm' and 'items'");
  }
  const auto m = j.at("m").get<std::size_t>();
  std::vector<MenuItem> items;
  for (const auto& e : j.at("items")) {
    items.push_back({e.at("x").get<std::vector<double>>(), e.at("p").get<double>()});
  }
  return Menu(m, std::move(items));
}

Menu load_menu(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open menu file '{}'", path));
  return menu_from_json(nlohmann::json::parse(in));
}

void save_menu(const Menu& menu, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  out << to_json(menu).dump(2) << '\n';
}

DistributionSpec DistributionSpec::uniform_rect(double c1, double c2) {
  if (!(c1 > 0.0 && c2 > 0.0 && std::isfinite(c1) && std::isfinite(c2))) {
    throw std::invalid_argument(fmt::format("UniformRect needs c1, c2 > 0 (got {}, {})", c1, c2));
  }
  return DistributionSpec(UniformRect{c1, c2});
}

DistributionSpec DistributionSpec::uniform_triangle(double c) {
  if (!(c >= 1.0 && std::isfinite(c))) {
    throw std::invalid_argument(fmt::format("UniformTriangle needs c >= 1 (got {})", c));
  }
  return DistributionSpec(UniformTriangle{c});
}

DistributionSpec DistributionSpec::custom(CustomDensity table) {
  if (!(table.width > 0.0 && table.height > 0.0) || table.nx == 0 || table.ny == 0) {
    throw std::invalid_argument("Custom density needs a positive box and cell counts");
  }
  if (table.density.size() != table.nx * table.ny) {
    throw std::invalid_argument(fmt::format("Custom density has {} entries, expected {}",
                                            table.density.size(), table.nx * table.ny));
  }
  double total = 0.0;
  for (double d : table.density) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument(fmt::format("Custom density has negative entry {}", d));
    }
    total += d;
  }
  total *= (table.width / static_cast<double>(table.nx)) * (table.height / static_cast<double>(table.ny));
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(fmt::format("Custom density integrates to {}, not 1", total));
  }
  return DistributionSpec(std::move(table));
}

Polygon DistributionSpec::support() const {
  if (const auto* r = std::get_if<UniformRect>(&v_)) return make_rectangle(0, 0, r->c1, r->c2);
  if (const auto* t = std::get_if<UniformTriangle>(&v_)) return {{0, 0}, {t->c, 0}, {0, 1}};
  const auto& c = std::get<CustomDensity>(v_);
  return make_rectangle(0, 0, c.width, c.height);
}

double DistributionSpec::uniform_density() const {
  if (const auto* r = std::get_if<UniformRect>(&v_)) return 1.0 / (r->c1 * r->c2);
  if (const auto* t = std::get_if<UniformTriangle>(&v_)) return 2.0 / t->c;
  throw std::invalid_argument("Custom distributions have no uniform density");
}

double DistributionSpec::density_at(Point2 v) const {
  if (const auto* c = std::get_if<CustomDensity>(&v_)) {
    if (v.x < 0 || v.y < 0 || v.x > c->width || v.y > c->height) return 0.0;
    const auto ix = std::min(c->nx - 1, static_cast<std::size_t>(v.x / c->width * static_cast<double>(c->nx)));
    const auto iy = std::min(c->ny - 1, static_cast<std::size_t>(v.y / c->height * static_cast<double>(c->ny)));
    return c->density[iy * c->nx + ix];
  }
  return contains(support(), v) ? uniform_density() : 0.0;
}

double DistributionSpec::max_value() const {
  if (const auto* r = std::get_if<UniformRect>(&v_)) return std::max(r->c1, r->c2);
  if (const auto* t = std::get_if<UniformTriangle>(&v_)) return std::max(t->c, 1.0);
  const auto& c = std::get<CustomDensity>(v_);
  return std::max(c.width, c.height);
}

std::string DistributionSpec::describe() const {
  if (const auto* r = std::get_if<UniformRect>(&v_)) return fmt::format("U[0,{}]x[0,{}]", r->c1, r->c2);
  if (const auto* t = std::get_if<UniformTriangle>(&v_)) return fmt::format("U{{v1/{} + v2 <= 1}}", t->c);
  const auto& c = std::get<CustomDensity>(v_);
  return fmt::format("custom {}x{} on [0,{}]x[0,{}]", c.nx, c.ny, c.width, c.height);
}

nlohmann::json to_json(const DistributionSpec& spec) {
  if (const auto* r = std::get_if<UniformRect>(&spec.variant())) {
    return {{"kind", "uniform_rect"}, {"c1", r->c1}, {"c2", r->c2}};
  }
  if (const auto* t = std::get_if<UniformTriangle>(&spec.variant())) {
    return {{"kind", "uniform_triangle"}, {"c", t->c}};
  }
  const auto& c = std::get<CustomDensity>(spec.variant());
  return {{"kind", "custom"}, {"width", c.width}, {"height", c.height},
          {"nx", c.nx}, {"ny", c.ny}, {"density", c.density}};
}

ValueGrid::ValueGrid(std::size_t m, std::vector<double> coords, std::vector<double> mass,
                     std::size_t resolution)
    : m_(m), n_(resolution), coords_(std::move(coords)), mass_(std::move(mass)) {
  if (m_ == 0) throw std::invalid_argument("grid dimension must be positive");
  if (mass_.empty()) throw std::invalid_argument("grid has no points");
  if (coords_.size() != mass_.size() * m_) {
    throw std::invalid_argument("grid coordinates do not match point count");
  }
  double total = 0.0;
  for (double w : mass_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument(fmt::format("grid mass {} is negative or non-finite", w));
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(fmt::format("grid masses sum to {}, not 1", total));
  }
}

ValueGrid make_grid(const DistributionSpec& spec, std::size_t n) {
  if (n == 0) throw std::invalid_argument("grid resolution N must be at least 1");
  const Polygon support = spec.support();
  double width = 0.0;
  double height = 0.0;
  for (const auto& p : support) {
    width = std::max(width, p.x);
    height = std::max(height, p.y);
  }
  const double h = 1.0 / static_cast<double>(n);
  // ceil with slack so that c * N landing on an integer does not add a sliver
  const auto cells = [&](double extent) {
    return static_cast<std::size_t>(std::ceil(extent * static_cast<double>(n) - 1e-9));
  };
  const std::size_t nx = cells(width);
  const std::size_t ny = cells(height);
  const auto* tri = std::get_if<UniformTriangle>(&spec.variant());

  std::vector<double> coords;
  std::vector<double> mass;
  coords.reserve(2 * nx * ny);
  mass.reserve(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) {
    const double x0 = static_cast<double>(i) * h;
    const double x1 = std::min(static_cast<double>(i + 1) * h, width);
    for (std::size_t j = 0; j < ny; ++j) {
      const double y0 = static_cast<double>(j) * h;
      const double y1 = std::min(static_cast<double>(j + 1) * h, height);
      // Unclipped cells use width * height and the midpoint directly, which
      // keeps masses exactly symmetric where the support is.
      double a = (x1 - x0) * (y1 - y0);
      Point2 at{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
      if (tri != nullptr && x1 / tri->c + y1 > 1.0) {
        // v1 / c + v2 <= 1  <=>  -v1 / c - v2 + 1 >= 0
        const Polygon cell = clip_halfplane(make_rectangle(x0, y0, x1, y1), -1.0 / tri->c, -1.0, 1.0);
        a = area(cell);
        if (!(a > 0.0)) continue;
        at = centroid(cell);
      }
      const double dens = spec.is_uniform() ? spec.uniform_density()
                                            : spec.density_at({0.5 * (x0 + x1), 0.5 * (y0 + y1)});
      const double weight = dens * a;
      if (!(weight > 0.0)) continue;
      coords.push_back(at.x);
      coords.push_back(at.y);
      mass.push_back(weight);
    }
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("distribution has no mass on the grid");
  for (double& w : mass) w /= total;
  return ValueGrid(2, std::move(coords), std::move(mass), n);
}

void write_grid_csv(const ValueGrid& grid, std::ostream& os) {
  for (std::size_t i = 0; i < grid.dim(); ++i) os << 'v' << (i + 1) << ',';
  os << "mass\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (double x : grid.point(k)) os << fmt::format("{:.17g},", x);
    os << fmt::format("{:.17g}\n", grid.mass(k));
  }
}

void menu_utility(const Menu& menu, std::span<const double> v, ValuationKind kind,
                  std::span<double> out) {
  const std::size_t m = menu.dim();
  if (v.size() != m) {
    throw std::invalid_argument(fmt::format("value has dimension {}, menu has {}", v.size(), m));
  }
  if (out.size() != menu.size()) throw std::invalid_argument("utility buffer size mismatch");
  if (kind == ValuationKind::Combinatorial && m != 2) {
    throw std::invalid_argument("combinatorial valuation is defined for two items");
  }
  const double bonus = kind == ValuationKind::Combinatorial ? v[0] * v[1] : 0.0;
  out[0] = 0.0;
  for (std::size_t j = 1; j < menu.size(); ++j) {
    const MenuItem& item = menu[j];
    double u = bonus - item.price;
    for (std::size_t i = 0; i < m; ++i) u += v[i] * item.allocation[i];
    out[j] = u;
  }
}

std::vector<double> menu_utility(const Menu& menu, std::span<const double> v, ValuationKind kind) {
  std::vector<double> out(menu.size());
  menu_utility(menu, v, kind, out);
  return out;
}

}  // namespace menunet
