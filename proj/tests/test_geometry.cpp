#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "menunet/geometry.hpp"

using namespace menunet;

TEST_CASE("shoelace area and orientation") {
  const Polygon sq = make_rectangle(0, 0, 2, 1);
  CHECK(signed_area(sq) == doctest::Approx(2.0));
  Polygon cw(sq.rbegin(), sq.rend());
  CHECK(signed_area(cw) == doctest::Approx(-2.0));
  CHECK(area(cw) == doctest::Approx(2.0));
  const Point2 g = centroid(sq);
  CHECK(g.x == doctest::Approx(1.0));
  CHECK(g.y == doctest::Approx(0.5));
}

TEST_CASE("clipping the unit square by a diagonal") {
  const Polygon sq = make_rectangle(0, 0, 1, 1);
  // keep v1 + v2 >= 0.8
  const Polygon upper = clip_halfplane(sq, 1.0, 1.0, -0.8);
  CHECK(area(upper) == doctest::Approx(1.0 - 0.32).epsilon(1e-14));
  const Polygon lower = clip_halfplane(sq, -1.0, -1.0, 0.8);
  CHECK(upper.size() == 5);
  CHECK(lower.size() == 3);
  CHECK(area(lower) + area(upper) == doctest::Approx(1.0).epsilon(1e-14));
  // centroid of the lower triangle with legs 0.8
  const Point2 g = centroid(lower);
  CHECK(g.x == doctest::Approx(0.8 / 3));
  CHECK(g.y == doctest::Approx(0.8 / 3));
}

TEST_CASE("degenerate clips are empty") {
  const Polygon sq = make_rectangle(0, 0, 1, 1);
  CHECK(clip_halfplane(sq, 1.0, 0.0, -2.0).empty());
  // touching along one edge only leaves a segment
  CHECK(clip_halfplane(sq, -1.0, 0.0, 0.0).empty());
  CHECK(clip_halfplane(sq, 1.0, 0.0, 1.0).size() == 4);
  CHECK(clip_halfplane(Polygon{}, 1.0, 0.0, 0.0).empty());
}

TEST_CASE("containment with tolerance") {
  const Polygon tri = make_polygon({{0, 0}, {2, 0}, {0, 1}});
  CHECK(contains(tri, {0.5, 0.25}));
  CHECK(contains(tri, {1.0, 0.5}));  // on the hypotenuse
  CHECK_FALSE(contains(tri, {1.0, 0.6}));
  CHECK_FALSE(contains(tri, {-1e-6, 0.5}));
}
