#pragma once

#include <span>
#include <vector>

namespace menunet {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Convex polygon, vertices in counter-clockwise order. Empty means no area.
using Polygon = std::vector<Point2>;

Polygon make_rectangle(double x0, double y0, double x1, double y1);
Polygon make_polygon(std::initializer_list<Point2> vertices);

/// Keeps the closed half-plane {p : a * p.x + b * p.y + offset >= 0}.
/// One Sutherland-Hodgman pass; collinear and repeated vertices closer than
/// 1e-12 are dropped, and results with fewer than three vertices are empty.
Polygon clip_halfplane(const Polygon& poly, double a, double b, double offset);

/// Signed shoelace area (positive for CCW).
double signed_area(std::span<const Point2> poly);
double area(std::span<const Point2> poly);
Point2 centroid(std::span<const Point2> poly);

bool contains(std::span<const Point2> poly, Point2 p, double tol = 1e-12);

}  // namespace menunet
