#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "menunet/core.hpp"

namespace menunet {

// Numerical optimal-transport certificate for menus on the uniform triangle
// T = {v1/c + v2 <= 1}. The signed measure is mu = mu_0 + mu_boundary - mu_interior:
// a unit point mass at the origin, a constant line density on the hypotenuse
// and a constant area density on T. A menu is certified optimal when mu is
// balanced on every response region and the transport cost equals revenue.

struct DualityMeasures {
  double c = 1.0;
  double origin_mass = 1.0;
  double boundary_density = 0.0;  // per unit length of the hypotenuse
  double interior_density = 0.0;  // per unit area

  double hypotenuse_length() const;
  double boundary_total() const;
  double interior_total() const;
};

/// Throws std::invalid_argument for c < 1.
DualityMeasures build_measures(double c);

struct RegionBalance {
  std::size_t item = 0;
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double plus_moment = 0.0;   // integral of |v|_1 d mu_plus over the region
  double minus_moment = 0.0;  // integral of |v|_1 d mu_minus over the region

  double gap() const { return mu_plus - mu_minus; }
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultQuadN = 10000;
inline constexpr double kCertificateTol = 1e-6;

/// One entry per menu item (empty regions included). quad_n >= 100 is the
/// number of segments per hypotenuse piece; each fan triangle of a region is
/// split into ceil(sqrt(quad_n))^2 sub-triangles.
std::vector<RegionBalance> region_balance(const Menu& menu, double c,
                                          std::size_t quad_n = kDefaultQuadN);

/// Sum over non-exit regions of plus_moment - minus_moment. Throws
/// QuadratureError when halving quad_n moves the value by more than tol.
double dual_objective(const Menu& menu, double c, std::size_t quad_n = kDefaultQuadN,
                      double tol = kCertificateTol);

struct DualityCertificate {
  double c = 1.0;
  std::vector<RegionBalance> regions;
  double dual_objective = 0.0;
  double revenue = 0.0;
  double tol = kCertificateTol;
  bool pass = false;
};

DualityCertificate certify(const Menu& menu, double c, std::size_t quad_n = kDefaultQuadN,
                           double tol = kCertificateTol);

/// {c, regions: [{i, mu_plus, mu_minus, gap}], dual_objective, revenue, verdict}
nlohmann::json to_json(const DualityCertificate& cert);

}  // namespace menunet
