#include "menunet/geometry.hpp"

#include <cmath>

namespace menunet {

namespace {

constexpr double kDedupTol = 1e-12;

bool near(Point2 a, Point2 b) {
  return std::abs(a.x - b.x) <= kDedupTol && std::abs(a.y - b.y) <= kDedupTol;
}

void push_unique(Polygon& out, Point2 p) {
  if (out.empty() || !near(out.back(), p)) out.push_back(p);
}

}  // namespace

Polygon make_rectangle(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

Polygon make_polygon(std::initializer_list<Point2> vertices) { return Polygon(vertices); }

Polygon clip_halfplane(const Polygon& poly, double a, double b, double offset) {
  Polygon out;
  const std::size_t n = poly.size();
  if (n < 3) return out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = poly[i];
    const Point2 q = poly[(i + 1) % n];
    const double fp = a * p.x + b * p.y + offset;
    const double fq = a * q.x + b * q.y + offset;
    if (fp >= 0.0) push_unique(out, p);
    if ((fp > 0.0 && fq < 0.0) || (fp < 0.0 && fq > 0.0)) {
      const double t = fp / (fp - fq);
      push_unique(out, {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
    }
  }
  while (out.size() > 1 && near(out.front(), out.back())) out.pop_back();
  if (out.size() < 3 || area(out) <= 0.0) return {};
  return out;
}

double signed_area(std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = poly[i];
    const Point2 q = poly[(i + 1) % n];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * twice;
}

double area(std::span<const Point2> poly) { return std::abs(signed_area(poly)); }

Point2 centroid(std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  if (n == 0) return {};
  const double a = signed_area(poly);
  if (a == 0.0) {
    Point2 mean;
    for (const auto& p : poly) {
      mean.x += p.x / static_cast<double>(n);
      mean.y += p.y / static_cast<double>(n);
    }
    return mean;
  }
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = poly[i];
    const Point2 q = poly[(i + 1) % n];
    const double cross = p.x * q.y - q.x * p.y;
    cx += (p.x + q.x) * cross;
    cy += (p.y + q.y) * cross;
  }
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

bool contains(std::span<const Point2> poly, Point2 p, double tol) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly[i];
    const Point2 b = poly[(i + 1) % n];
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (cross < -tol * len) return false;
  }
  return true;
}

}  // namespace menunet
