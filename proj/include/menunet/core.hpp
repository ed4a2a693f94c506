#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "menunet/geometry.hpp"

namespace menunet {

/// How the buyer values an allocation.
///  Additive:      u = sum_i v_i x_i - p
///  Combinatorial: u = x_1 v_1 + x_2 v_2 + v_1 v_2 - p (two items; the exit item stays at 0)
///  UnitDemand:    additive utility; x_1 + ... + x_m <= 1 is the trainer's job
enum class ValuationKind { Additive, Combinatorial, UnitDemand };

std::string to_string(ValuationKind kind);
ValuationKind valuation_from_string(const std::string& name);

struct MenuItem {
  std::vector<double> allocation;
  double price = 0.0;

  bool is_exit() const;
};

/// A mechanism in menu form. Index 0 always holds the exit item [(0,...,0), 0]
/// and no other item equals it.
class Menu {
 public:
  /// `items` must start with the exit item.
  Menu(std::size_t m, std::vector<MenuItem> items);

  /// Prepends the exit item to `offers`.
  static Menu with_exit(std::size_t m, std::vector<MenuItem> offers);

  std::size_t dim() const { return m_; }
  std::size_t size() const { return items_.size(); }
  const MenuItem& operator[](std::size_t i) const { return items_[i]; }
  const std::vector<MenuItem>& items() const { return items_; }
  double max_price() const;

 private:
  std::size_t m_;
  std::vector<MenuItem> items_;
};

nlohmann::json to_json(const Menu& menu);
Menu menu_from_json(const nlohmann::json& j);
Menu load_menu(const std::string& path);
void save_menu(const Menu& menu, const std::string& path);

struct UniformRect {
  double c1 = 1.0;
  double c2 = 1.0;
};

/// Uniform on {v >= 0 : v_1 / c + v_2 <= 1}.
struct UniformTriangle {
  double c = 1.0;
};

/// Piecewise-constant density on [0,width] x [0,height], nx * ny cells,
/// row-major with v_1 varying fastest.
struct CustomDensity {
  double width = 1.0;
  double height = 1.0;
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::vector<double> density;
};

class DistributionSpec {
 public:
  using Variant = std::variant<UniformRect, UniformTriangle, CustomDensity>;

  static DistributionSpec uniform_rect(double c1, double c2);
  static DistributionSpec uniform_triangle(double c);
  static DistributionSpec custom(CustomDensity table);

  const Variant& variant() const { return v_; }
  bool is_uniform() const { return !std::holds_alternative<CustomDensity>(v_); }

  /// Support polygon (bounding box for Custom).
  Polygon support() const;
  /// Density at v; zero outside the support.
  double density_at(Point2 v) const;
  /// Constant density of the uniform variants; throws for Custom.
  double uniform_density() const;
  /// Largest coordinate value attained on the support.
  double max_value() const;
  std::string describe() const;

 private:
  explicit DistributionSpec(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

nlohmann::json to_json(const DistributionSpec& spec);

/// Discretized value distribution: points with probability masses.
class ValueGrid {
 public:
  /// `coords` holds size * m values, point-major. Masses must be nonnegative
  /// and sum to 1 within 1e-9.
  ValueGrid(std::size_t m, std::vector<double> coords, std::vector<double> mass,
            std::size_t resolution = 0);

  std::size_t size() const { return mass_.size(); }
  std::size_t dim() const { return m_; }
  /// The discretization parameter N (intervals per unit length); 0 if hand-built.
  std::size_t resolution() const { return n_; }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * m_, m_};
  }
  double mass(std::size_t i) const { return mass_[i]; }
  std::span<const double> masses() const { return mass_; }
  std::span<const double> coords() const { return coords_; }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> coords_;
  std::vector<double> mass_;
};

/// Cells of side 1/N over the support. Each point sits at the centroid of
/// its cell clipped to the support (the cell center for interior cells) and
/// carries density x clipped area, renormalized to total mass 1.
ValueGrid make_grid(const DistributionSpec& spec, std::size_t n);

/// Columns v1,...,vm,mass.
void write_grid_csv(const ValueGrid& grid, std::ostream& os);

/// Utility of every menu item at value v. The exit item is exactly 0.
std::vector<double> menu_utility(const Menu& menu, std::span<const double> v,
                                 ValuationKind kind);
void menu_utility(const Menu& menu, std::span<const double> v, ValuationKind kind,
                  std::span<double> out);

}  // namespace menunet
