#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rungekit/shapes.hpp"

using namespace rungekit;

TEST_CASE("distances to primitives match hand values") {
  Shape disc = DiscShape{{0, 0}, 1.0};
  CHECK(shape_distance(disc, {2, 0}) == doctest::Approx(1.0));
  CHECK(shape_distance(disc, {0.5, 0}) == 0.0);
  CHECK(shape_distance(disc, {0, -3}) == doctest::Approx(2.0));

  Shape rect = RectShape{Box{0, 0, 2, 1}};
  CHECK(shape_distance(rect, {3, 0.5}) == doctest::Approx(1.0));
  CHECK(shape_distance(rect, {3, 2}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(shape_distance(rect, {1, 0.5}) == 0.0);

  Shape circ = CircleShape{{0, 0}, 1.0};
  CHECK(shape_distance(circ, {0, 0}) == doctest::Approx(1.0));
  CHECK(shape_distance(circ, {0.5, 0}) == doctest::Approx(0.5));
  CHECK(shape_distance(circ, {2, 0}) == doctest::Approx(1.0));

  Shape ann = AnnulusShape{{0, 0}, 0.5, 1.0};
  CHECK(shape_distance(ann, {0, 0}) == doctest::Approx(0.5));
  CHECK(shape_distance(ann, {0.75, 0}) == 0.0);
  CHECK(shape_distance(ann, {0, 1.25}) == doctest::Approx(0.25));

  Shape tri = PolyShape{{{0, 0}, {2, 0}, {0, 2}}};
  CHECK(shape_distance(tri, {0.5, 0.5}) == 0.0);
  CHECK(shape_distance(tri, {-1, 0}) == doctest::Approx(1.0));
  CHECK(shape_distance(tri, {2, 2}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("cell intersection tests are exact for discs and circles") {
  Shape circ = CircleShape{{0, 0}, 1.0};
  // cell well inside the disc but away from the curve
  CHECK_FALSE(shape_meets_cell(circ, Box{-0.1, -0.1, 0.1, 0.1}));
  // cell straddling the curve
  CHECK(shape_meets_cell(circ, Box{0.95, -0.05, 1.05, 0.05}));
  // cell fully outside
  CHECK_FALSE(shape_meets_cell(circ, Box{1.2, 1.2, 1.4, 1.4}));

  Shape disc = DiscShape{{0, 0}, 1.0};
  CHECK(shape_meets_cell(disc, Box{-0.1, -0.1, 0.1, 0.1}));
  CHECK(shape_meets_cell(disc, Box{0.99, 0.0, 1.2, 0.2}));
  CHECK_FALSE(shape_meets_cell(disc, Box{0.75, 0.75, 1.0, 1.0}));  // corner gap
}

TEST_CASE("holes carve sets and distance sees the carved boundary") {
  // annulus built as disc minus open disc
  ShapeSet ann({DiscShape{{0, 0}, 1.0}}, {DiscShape{{0, 0}, 0.5}});
  CHECK(ann.contains({0.75, 0}));
  CHECK_FALSE(ann.contains({0, 0}));
  CHECK(ann.distance({0, 0}) == doctest::Approx(0.5));
  CHECK(ann.distance({0.25, 0}) == doctest::Approx(0.25));
  CHECK(ann.distance({1.5, 0}) == doctest::Approx(0.5));
  // boundary of the hole stays in the set
  CHECK(ann.contains({0.5, 0}));
}

TEST_CASE("offset sets behave like metric dilations") {
  ShapeSet disc({DiscShape{{0, 0}, 1.0}});
  ShapeSet fat = disc.with_offset(0.25);
  CHECK(fat.contains({1.2, 0}));
  CHECK_FALSE(fat.contains({1.3, 0}));
  CHECK(fat.distance({1.5, 0}) == doctest::Approx(0.25));
  CHECK(fat.radius_about({0, 0}) == doctest::Approx(1.25));
  Box b = fat.bbox();
  CHECK(b.x0 == doctest::Approx(-1.25));
  CHECK(b.x1 == doctest::Approx(1.25));
}

TEST_CASE("segment crossing handles generic and touching cases") {
  CHECK(segments_cross({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  CHECK_FALSE(segments_cross({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  CHECK(segments_cross({0, 0}, {2, 0}, {1, 0}, {1, 1}));  // endpoint on segment
}

TEST_CASE("point in polygon agrees with distance on random queries") {
  std::vector<cplx> penta;
  for (int k = 0; k < 5; ++k) {
    double a = 2 * M_PI * k / 5;
    penta.push_back({std::cos(a), std::sin(a)});
  }
  Shape poly = PolyShape{penta};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 500; ++t) {
    cplx p{u(rng), u(rng)};
    bool in = point_in_polygon(penta, p);
    double d = shape_distance(poly, p);
    if (in) CHECK(d == 0.0);
    if (d > 1e-9) CHECK(in == (d == 0.0));
  }
}
