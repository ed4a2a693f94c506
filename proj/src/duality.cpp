#include "menunet/duality.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/core.h>

#include "menunet/buyer.hpp"
#include "menunet/evaluator.hpp"
#include "menunet/geometry.hpp"

namespace menunet {

double DualityMeasures::hypotenuse_length() const { return std::sqrt(1.0 + c * c); }
double DualityMeasures::boundary_total() const { return boundary_density * hypotenuse_length(); }
double DualityMeasures::interior_total() const { return interior_density * c / 2.0; }

DualityMeasures build_measures(double c) {
  if (!(c >= 1.0) || !std::isfinite(c)) {
    throw std::invalid_argument(fmt::format("build_measures: c must be >= 1, got {}", c));
  }
  DualityMeasures mu;
  mu.c = c;
  mu.origin_mass = 1.0;
  // f = 2/c on T; f(v) (v . eta) with v . eta = c / sqrt(1 + c^2) on the hypotenuse
  mu.boundary_density = 2.0 / std::sqrt(1.0 + c * c);
  // grad f . v + (n + 1) f with n = 2
  mu.interior_density = 6.0 / c;
  return mu;
}

namespace {

double l1(Point2 p) { return std::abs(p.x) + std::abs(p.y); }

Point2 lerp(Point2 a, Point2 b, double t) { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }

bool on_hypotenuse(Point2 p, double c) {
  return std::abs(p.x / c + p.y - 1.0) <= 1e-9;
}

// Composite midpoint rule for the mass and |v|_1 moment of a constant line density.
void line_integral(Point2 a, Point2 b, double density, std::size_t pieces, double& mass,
                   double& moment) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const double h = len / static_cast<double>(pieces);
  for (std::size_t k = 0; k < pieces; ++k) {
    const Point2 mid = lerp(a, b, (static_cast<double>(k) + 0.5) / static_cast<double>(pieces));
    mass += density * h;
    moment += density * h * l1(mid);
  }
}

// Triangle split into k^2 congruent sub-triangles, centroid rule on each.
void area_integral(Point2 a, Point2 b, Point2 c, double density, std::size_t k, double& mass,
                   double& moment) {
  const double tri = std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)) / 2.0;
  if (tri == 0.0) return;
  const double sub = tri / static_cast<double>(k * k);
  const double kd = static_cast<double>(k);
  auto at = [&](std::size_t i, std::size_t j) {
    const double s = static_cast<double>(i) / kd;
    const double t = static_cast<double>(j) / kd;
    return Point2{a.x + s * (b.x - a.x) + t * (c.x - a.x), a.y + s * (b.y - a.y) + t * (c.y - a.y)};
  };
  auto add = [&](Point2 p, Point2 q, Point2 r) {
    const Point2 g{(p.x + q.x + r.x) / 3.0, (p.y + q.y + r.y) / 3.0};
    mass += density * sub;
    moment += density * sub * l1(g);
  };
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; i + j < k; ++j) {
      add(at(i, j), at(i + 1, j), at(i, j + 1));
      if (i + j + 1 < k) add(at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
    }
  }
}

void check_menu(const Menu& menu) {
  if (menu.dim() != 2) throw std::invalid_argument("duality: menu must have two goods");
}

}  // namespace

std::vector<RegionBalance> region_balance(const Menu& menu, double c, std::size_t quad_n) {
  check_menu(menu);
  if (quad_n < 100) throw std::invalid_argument("region_balance: quad_n must be at least 100");
  const DualityMeasures mu = build_measures(c);
  const DistributionSpec spec = DistributionSpec::uniform_triangle(c);
  const auto regs = regions(menu, spec);
  const std::size_t k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(quad_n))));

  const std::array<double, 2> origin{0.0, 0.0};
  const std::size_t origin_item = hard_response(menu, origin, ValuationKind::Additive);

  std::vector<RegionBalance> out;
  out.reserve(regs.size());
  for (const ResponseRegion& reg : regs) {
    RegionBalance b;
    b.item = reg.item;
    if (reg.item == origin_item) b.mu_plus += mu.origin_mass;  // |0|_1 = 0, no moment
    const Polygon& poly = reg.polygon;
    const std::size_t n = poly.size();
    if (n >= 3) {
      for (std::size_t e = 0; e < n; ++e) {
        const Point2 a = poly[e];
        const Point2 q = poly[(e + 1) % n];
        if (on_hypotenuse(a, c) && on_hypotenuse(q, c)) {
          line_integral(a, q, mu.boundary_density, quad_n, b.mu_plus, b.plus_moment);
        }
      }
      for (std::size_t e = 1; e + 1 < n; ++e) {
        area_integral(poly[0], poly[e], poly[e + 1], mu.interior_density, k, b.mu_minus,
                      b.minus_moment);
      }
    }
    out.push_back(b);
  }
  return out;
}

namespace {

double objective_from(const std::vector<RegionBalance>& regs) {
  double total = 0.0;
  for (const RegionBalance& r : regs) {
    if (r.item == 0) continue;  // exit region: mass moves out of the origin at zero cost
    total += r.plus_moment - r.minus_moment;
  }
  return total;
}

}  // namespace

double dual_objective(const Menu& menu, double c, std::size_t quad_n, double tol) {
  const double fine = objective_from(region_balance(menu, c, quad_n));
  const std::size_t coarse_n = quad_n / 2 >= 100 ? quad_n / 2 : quad_n * 2;
  const double coarse = objective_from(region_balance(menu, c, coarse_n));
  if (std::abs(fine - coarse) > tol) {
    throw QuadratureError(fmt::format(
        "dual_objective: quadrature did not converge ({:.3e} at n={} vs {:.3e} at n={})", fine,
        quad_n, coarse, coarse_n));
  }
  return fine;
}

DualityCertificate certify(const Menu& menu, double c, std::size_t quad_n, double tol) {
  DualityCertificate cert;
  cert.c = c;
  cert.tol = tol;
  cert.regions = region_balance(menu, c, quad_n);
  cert.dual_objective = dual_objective(menu, c, quad_n, tol);
  cert.revenue = exact_revenue(menu, DistributionSpec::uniform_triangle(c));
  cert.pass = std::abs(cert.dual_objective - cert.revenue) < tol;
  for (const RegionBalance& r : cert.regions) {
    if (!(std::abs(r.gap()) < tol)) cert.pass = false;
  }
  return cert;
}

nlohmann::json to_json(const DualityCertificate& cert) {
  nlohmann::json regs = nlohmann::json::array();
  for (const RegionBalance& r : cert.regions) {
    regs.push_back({{"i", r.item},
                    {"mu_plus", r.mu_plus},
                    {"mu_minus", r.mu_minus},
                    {"gap", r.gap()},
                    {"plus_moment", r.plus_moment},
                    {"minus_moment", r.minus_moment}});
  }
  return {{"c", cert.c},
          {"regions", regs},
          {"dual_objective", cert.dual_objective},
          {"revenue", cert.revenue},
          {"tol", cert.tol},
          {"verdict", cert.pass ? "pass" : "fail"}};
}

}  // namespace menunet
