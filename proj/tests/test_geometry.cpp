#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "rungekit/geometry.hpp"

using namespace rungekit;

namespace {

// independent winding oracle: signed horizontal ray crossings
int winding_by_crossings(const Cycle& c, cplx p) {
  int w = 0;
  for (const auto& loop : c.loops) {
    size_t n = loop.pts.size();
    for (size_t k = 0; k < n; ++k) {
      cplx a = loop.pts[k], b = loop.pts[(k + 1) % n];
      if ((a.imag() <= p.imag() && b.imag() > p.imag()) ||
          (b.imag() <= p.imag() && a.imag() > p.imag())) {
        double x = a.real() + (p.imag() - a.imag()) / (b.imag() - a.imag()) *
                                  (b.real() - a.real());
        if (x > p.real()) w += (b.imag() > a.imag()) ? 1 : -1;
      }
    }
  }
  return w;
}

// independent island counter: 8-connected components of the mask
int mask_islands(const PlanarCompact& K) {
  const BitGrid& m = K.mask();
  Grid<int32_t> lab(m.x0(), m.y0(), m.pitch(), m.nx(), m.ny(), 0);
  int n = 0;
  for (int j = 0; j < m.ny(); ++j)
    for (int i = 0; i < m.nx(); ++i) {
      if (!m.at(i, j) || lab.at(i, j)) continue;
      ++n;
      std::vector<std::pair<int, int>> stack{{i, j}};
      lab.at(i, j) = n;
      while (!stack.empty()) {
        auto [ci, cj] = stack.back();
        stack.pop_back();
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            int ni = ci + di, nj = cj + dj;
            if (lab.in_range(ni, nj) && m.at(ni, nj) && !lab.at(ni, nj)) {
              lab.at(ni, nj) = n;
              stack.emplace_back(ni, nj);
            }
          }
      }
    }
  return n;
}

PlanarCompact unit_disc(double h = 0.05, double pad = 0.5) {
  return PlanarCompact::rasterize(ShapeSet({DiscShape{{0, 0}, 1.0}}), h, pad);
}

PlanarCompact annulus(double h = 0.02, double pad = 0.3) {
  return PlanarCompact::rasterize(ShapeSet({AnnulusShape{{0, 0}, 0.5, 1.0}}), h, pad);
}

}  // namespace

TEST_CASE("distance transform matches brute force on random masks") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    int nx = 23, ny = 17;
    std::vector<double> seed(nx * ny, 1e30);
    std::vector<std::pair<int, int>> feats;
    std::uniform_int_distribution<int> ux(0, nx - 1), uy(0, ny - 1);
    for (int k = 0; k < 25; ++k) {
      int i = ux(rng), j = uy(rng);
      seed[j * nx + i] = 0.0;
      feats.emplace_back(i, j);
    }
    auto d = distance_transform(seed, nx, ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        double best = 1e30;
        for (auto [fi, fj] : feats)
          best = std::min(best, std::hypot(double(i - fi), double(j - fj)));
        CHECK(d[j * nx + i] == doctest::Approx(best).epsilon(1e-12));
      }
  }
}

TEST_CASE("unit disc mask covers the disc and its area is close") {
  auto K = unit_disc(0.05);
  // covering: a dense sample of the disc always lands in a marked cell
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 2000; ++t) {
    cplx p{u(rng), u(rng)};
    if (std::abs(p) > 1) continue;
    auto [i, j] = K.mask().locate(p);
    REQUIRE(K.mask().in_range(i, j));
    CHECK(K.masked(i, j));
  }
  // conservative mask: area overshoots by at most a one-cell ring.
  double area = K.cell_count() * K.pitch() * K.pitch();
  CHECK(area >= M_PI);
  CHECK(area - M_PI < 0.30);
}

TEST_CASE("degenerate point compact rasterizes to a single cell") {
  auto K = PlanarCompact::rasterize(ShapeSet({PointsShape{{{1, 1}}}}), 0.05);
  CHECK(K.cell_count() == 1);
  auto comps = complement_components(K);
  CHECK(comps.count == 1);
  CHECK(comps.unbounded == 0);
}

TEST_CASE("complement component counts for the standard menagerie") {
  SUBCASE("two separated discs: one complement component, two islands") {
    ShapeSet s({DiscShape{{-3, 0}, 1.0}, DiscShape{{3, 0}, 1.0}});
    auto K = PlanarCompact::rasterize(s, 0.1);
    auto comps = complement_components(K);
    CHECK(comps.count == 1);
    CHECK(mask_islands(K) == 2);
  }
  SUBCASE("annulus: hole plus unbounded") {
    auto K = annulus();
    auto comps = complement_components(K);
    CHECK(comps.count == 2);
    CHECK(comps.label_at({0, 0}) != comps.unbounded);
    CHECK(comps.label_at({0, 0}) >= 0);
    CHECK(comps.label_at({2, 2}) == comps.unbounded);
  }
  SUBCASE("disc minus three open discs: four components") {
    ShapeSet s({DiscShape{{0, 0}, 1.0}},
               {DiscShape{{-0.45, 0}, 0.2}, DiscShape{{0.45, 0}, 0.2},
                DiscShape{{0, 0.45}, 0.2}});
    auto K = PlanarCompact::rasterize(s, 0.02);
    auto comps = complement_components(K);
    CHECK(comps.count == 4);
  }
}

TEST_CASE("refining the grid never merges well-separated components") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 8; ++trial) {
    double cx = u(rng), cy = u(rng);
    ShapeSet s({DiscShape{{0, 0}, 1.0}},
               {DiscShape{{0.4 * cx, 0.4 * cy}, 0.25}});
    auto K1 = PlanarCompact::rasterize(s, 0.04);
    auto K2 = PlanarCompact::rasterize(s, 0.02);
    CHECK(complement_components(K2).count >= complement_components(K1).count);
    CHECK(complement_components(K1).count == 2);
  }
}

TEST_CASE("pole validation certifies coverage and rejects bad poles") {
  SUBCASE("disc with pole at infinity") {
    auto K = unit_disc();
    auto comps = complement_components(K);
    auto ps = validate_pole_set(K, comps, {std::nullopt});
    CHECK(ps.assignment[comps.unbounded] == 0);
  }
  SUBCASE("annulus with only infinity misses the hole") {
    auto K = annulus();
    auto comps = complement_components(K);
    CHECK_THROWS_WITH_AS(validate_pole_set(K, comps, {std::nullopt}),
                         doctest::Contains("MissingPoleInComponent"), RkError);
  }
  SUBCASE("annulus with hole pole and infinity validates") {
    auto K = annulus();
    auto comps = complement_components(K);
    auto ps = validate_pole_set(K, comps, {cplx{0, 0}, std::nullopt});
    int hole = comps.label_at({0, 0});
    CHECK(ps.assignment[hole] == 0);
    CHECK(ps.assignment[comps.unbounded] == 1);
  }
  SUBCASE("pole on the set is rejected") {
    auto K = unit_disc();
    auto comps = complement_components(K);
    CHECK_THROWS_WITH_AS(validate_pole_set(K, comps, {cplx{0.5, 0}, std::nullopt}),
                         doctest::Contains("PoleInsideSet"), RkError);
  }
}

TEST_CASE("cycle around the disc: one loop, winding certificate, clearance") {
  auto K = unit_disc(0.05);
  auto cyc = build_cycle(K, 0.2);
  CHECK(cyc.loops.size() == 1);
  CHECK(cyc.clearance >= 0.1);
  CHECK(winding_number(cyc, {0, 0}) == 1);
  CHECK(winding_number(cyc, {0.9, 0}) == 1);
  CHECK(winding_number(cyc, {2, 2}) == 0);
  // matches the independent crossing-count oracle on random probes
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 200; ++t) {
    cplx p{u(rng), u(rng)};
    if (std::abs(K.distance(p) - cyc.delta) < 0.1) continue;  // stay off the cycle
    CHECK(winding_number(cyc, p) == winding_by_crossings(cyc, p));
  }
}

TEST_CASE("cycle around the annulus: two loops with correct winding") {
  auto K = annulus(0.02);
  auto cyc = build_cycle(K, 0.1);
  CHECK(cyc.loops.size() == 2);
  CHECK(winding_number(cyc, {0.75, 0}) == 1);
  CHECK(winding_number(cyc, {0, 0}) == 0);
  CHECK(winding_number(cyc, {3, 0}) == 0);
  CHECK(cyc.clearance >= 0.05);
}

TEST_CASE("oversized dilation reports DilationOverflow") {
  auto K = unit_disc(0.05);
  CHECK_THROWS_WITH_AS(build_cycle(K, 5.0), doctest::Contains("DilationOverflow"),
                       RkError);
}

TEST_CASE("sample plans are dense and sit inside the mask") {
  auto K = unit_disc(0.05);
  auto plan = sample_points(K, 1);
  CHECK(plan.boundary.size() > 100);
  CHECK(plan.interior.size() > 500);
  for (cplx p : plan.all) {
    auto [i, j] = K.mask().locate(p);
    REQUIRE(K.mask().in_range(i, j));
    CHECK(K.masked(i, j));
  }
  auto fine = sample_points(K, 2);
  CHECK(fine.all.size() > 2 * plan.all.size());
}

TEST_CASE("reach trees route to infinity and to hole poles") {
  SUBCASE("disc to infinity") {
    auto K = unit_disc(0.05);
    auto comps = complement_components(K);
    auto tree = ReachTree::build(K, comps, comps.unbounded, std::nullopt);
    auto wp = tree.waypoints_from({1.3, 0});
    CHECK(wp.size() >= 2);
    CHECK(wp.front() == cplx{1.3, 0});
    // consecutive waypoints are grid neighbours
    for (size_t k = 1; k < wp.size(); ++k)
      CHECK(std::abs(wp[k] - wp[k - 1]) <= K.pitch() * 1.5 + 1e-12);
    // route ends at the grid border
    CHECK(K.distance(wp.back()) > 0.35);
  }
  SUBCASE("annulus hole to its pole") {
    auto K = annulus(0.02);
    auto comps = complement_components(K);
    int hole = comps.label_at({0, 0});
    auto tree = ReachTree::build(K, comps, hole, cplx{0, 0});
    auto wp = tree.waypoints_from({0.35, 0});
    CHECK(wp.front() == cplx{0.35, 0});
    CHECK(std::abs(wp.back()) == 0.0);
  }
  SUBCASE("hole cannot reach infinity") {
    auto K = annulus(0.02);
    auto comps = complement_components(K);
    int hole = comps.label_at({0, 0});
    CHECK_THROWS_WITH_AS(ReachTree::build(K, comps, hole, std::nullopt),
                         doctest::Contains("PathNotFound"), RkError);
  }
}
