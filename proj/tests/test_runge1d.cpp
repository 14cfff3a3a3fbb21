#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rungekit/errors.hpp"
#include "rungekit/runge1d.hpp"

using namespace rungekit;

namespace {

PlanarCompact unit_disc(double h = 0.05) {
  ShapeSet s({DiscShape{{0, 0}, 1.0}}, {});
  return PlanarCompact::rasterize(s, h, 0.5);
}

PlanarCompact annulus(double h = 0.02) {
  ShapeSet s({DiscShape{{0, 0}, 1.0}}, {DiscShape{{0, 0}, 0.5}});
  return PlanarCompact::rasterize(s, h, 0.3, {{0.0, 0.0}});
}

Cycle::Loop closed_loop(std::vector<cplx> pts) {
  Cycle::Loop loop;
  loop.pts = std::move(pts);
  loop.cumlen.assign(loop.pts.size(), 0.0);
  double L = 0;
  for (size_t k = 0; k + 1 < loop.pts.size(); ++k) {
    loop.cumlen[k] = L;
    L += std::abs(loop.pts[k + 1] - loop.pts[k]);
  }
  loop.cumlen.back() = L;
  L += std::abs(loop.pts.front() - loop.pts.back());
  loop.length = L;
  return loop;
}

OracleFn fn1(std::function<cplx(cplx)> f, double margin = 0.25) {
  OracleFn o;
  o.dim = 1;
  o.margin = margin;
  o.f = [f = std::move(f)](std::span<const cplx> z) { return f(z[0]); };
  return o;
}

cplx quad_sum(const CauchyQuadrature& q, const std::vector<cplx>& gv,
              cplx z) {
  cplx acc = 0;
  for (size_t k = 0; k < q.nodes.size(); ++k)
    acc += q.nodes[k].weight * gv[k] / (q.nodes[k].zeta - z);
  return acc;
}

// dense polar grid over the unit disc, denser than any certification sample
std::vector<cplx> disc_grid(double rmax = 1.0, int nr = 40, int nt = 120) {
  std::vector<cplx> out;
  for (int a = 0; a <= nr; ++a)
    for (int b = 0; b < nt; ++b) {
      double r = rmax * a / nr, t = 2 * 3.14159265358979 * b / nt;
      out.push_back({r * std::cos(t), r * std::sin(t)});
    }
  return out;
}

}  // namespace

TEST_CASE("contour quadrature reproduces the Cauchy integral of a constant") {
  PlanarCompact K = unit_disc();
  Cycle gamma = build_cycle(K, 0.2);
  OracleFn one = fn1([](cplx) { return cplx{1, 0}; });
  CauchyQuadrature q = cauchy_quadrature(one, K, gamma, 1e-8);
  CHECK(q.loop_closure < 1e-12);
  CHECK(q.sampled_error <= 1e-8);
  // winding weights: ~1 well inside, ~0 far outside the cycle
  std::vector<cplx> gv(q.nodes.size(), cplx{1, 0});
  CHECK(std::abs(quad_sum(q, gv, {0.3, 0.2}) - cplx{1, 0}) < 1e-8);
  CHECK(std::abs(quad_sum(q, gv, {5, 5})) < 1e-3);
}

TEST_CASE("square-contour quadrature error shrinks by >= 3x per doubling") {
  // hand-built square cycle of side 2.4 around the unit disc
  Cycle gamma;
  gamma.loops.push_back(closed_loop(
      {{-1.2, -1.2}, {1.2, -1.2}, {1.2, 1.2}, {-1.2, 1.2}}));
  gamma.delta = 0.2;
  gamma.clearance = 0.2;
  auto sample = disc_grid(0.95, 12, 40);
  double prev = -1;
  for (int level = 2; level <= 5; ++level) {
    CauchyQuadrature q = quadrature_at_level(gamma, level, 16);
    std::vector<cplx> gv(q.nodes.size());
    for (size_t k = 0; k < q.nodes.size(); ++k) gv[k] = q.nodes[k].zeta;
    double worst = 0;
    for (cplx z : sample)
      worst = std::max(worst, std::abs(quad_sum(q, gv, z) - z));
    if (prev > 0) CHECK(prev / worst >= 3.0);
    prev = worst;
  }
}

TEST_CASE("contour quadrature hits 1e-6 for a nearby pole within the node limit") {
  PlanarCompact K = unit_disc();
  Cycle gamma = build_cycle(K, 0.2);
  OracleFn g = fn1([](cplx z) { return 1.0 / (z - 2.0); });
  CauchyQuadrature q = cauchy_quadrature(g, K, gamma, 1e-6);
  CHECK(q.sampled_error <= 1e-6);
  CHECK(q.nodes.size() <= (1u << 14));
  // independent dense-grid comparison, away from the rim
  double worst = 0;
  for (cplx z : disc_grid(0.97))
    worst = std::max(worst, std::abs(quad_sum(q, q.gvals, z) - 1.0 / (z - 2.0)));
  CHECK(worst <= 2e-6);
}

TEST_CASE("refinement limits surface instead of spinning forever") {
  PlanarCompact K = unit_disc();
  Cycle gamma = build_cycle(K, 0.2);
  OracleFn g = fn1([](cplx z) { return 1.0 / (z - 2.0); });
  RungeLimits lim;
  lim.max_quad_level = 2;
  lim.base_nodes = 8;
  CHECK_THROWS_WITH_AS(cauchy_quadrature(g, K, gamma, 1e-12, lim),
                       doctest::Contains("RefinementLimitExceeded"), RkError);
}

TEST_CASE("pushing a pole to infinity yields a small certified polynomial") {
  PlanarCompact K = unit_disc();
  RationalUnivariate r = push_pole({2, 0}, K, std::nullopt, 1e-6);
  CHECK(r.parts.empty());
  CHECK(r.poly_degree() >= 15);
  CHECK(r.poly_degree() <= 30);
  double worst = 0;
  for (cplx z : disc_grid())
    worst = std::max(worst, std::abs(1.0 / (cplx{2, 0} - z) - r.eval(z)));
  CHECK(worst <= 1e-6);
}

TEST_CASE("pushing into an annulus hole keeps every pole at the target") {
  PlanarCompact K = annulus();
  RationalUnivariate r = push_pole({0.1, 0}, K, cplx{0, 0}, 1e-6);
  CHECK(r.poly_degree() == -1);
  REQUIRE(r.parts.size() == 1);
  CHECK(r.parts[0].pole == cplx{0, 0});
  CHECK(r.max_part_order() <= 12);
  double worst = 0;
  for (int a = 0; a <= 25; ++a)
    for (int b = 0; b < 90; ++b) {
      double rad = 0.5 + 0.5 * a / 25, t = 2 * 3.14159265358979 * b / 90;
      cplx z{rad * std::cos(t), rad * std::sin(t)};
      worst = std::max(worst, std::abs(1.0 / (cplx{0.1, 0} - z) - r.eval(z)));
    }
  CHECK(worst <= 1e-6);
}

TEST_CASE("unreachable targets report PathNotFound") {
  PlanarCompact K = annulus();
  CHECK_THROWS_WITH_AS(push_pole({0.1, 0}, K, std::nullopt, 1e-6),
                       doctest::Contains("PathNotFound"), RkError);
  CHECK_THROWS_WITH_AS(push_pole({1.5, 0}, K, cplx{0, 0}, 1e-6),
                       doctest::Contains("PathNotFound"), RkError);
}

TEST_CASE("exp on the disc turns into a polynomial close to its Taylor sum") {
  PlanarCompact K = unit_disc();
  ComplementComponents comps = complement_components(K);
  PoleSet L = validate_pole_set(K, comps, {std::nullopt});
  OracleFn g = fn1([](cplx z) { return std::exp(z); });
  UnivariateReport rep;
  RationalUnivariate r = approximate_univariate(g, K, L, 1e-4, 0.12, &rep);
  CHECK(r.parts.empty());  // poles only at infinity
  CHECK(rep.sampled_error <= 1e-4);
  auto taylor = [](cplx z) {
    cplx acc = 0, term{1, 0};
    for (int n = 0; n <= 20; ++n) {
      acc += term;
      term *= z / static_cast<double>(n + 1);
    }
    return acc;
  };
  double worst = 0;
  for (cplx z : disc_grid())
    worst = std::max(worst, std::abs(taylor(z) - r.eval(z)));
  CHECK(worst <= 2e-4);
}

TEST_CASE("a function already shaped like the pole set passes straight through") {
  PlanarCompact K = annulus();
  ComplementComponents comps = complement_components(K);
  PoleSet L = validate_pole_set(K, comps, {cplx{0.2, 0}, std::nullopt});
  OracleFn g = fn1([](cplx z) { return 1.0 / (z - 0.2); }, 0.2);
  UnivariateReport rep;
  RationalUnivariate r = approximate_univariate(g, K, L, 1e-4, 0.1, &rep);
  CHECK(rep.sampled_error <= 1e-4);
  for (const auto& p : r.parts) CHECK(p.pole == cplx{0.2, 0});
}

TEST_CASE("annulus pole set {0, infinity} splits a middle pole correctly") {
  PlanarCompact K = annulus();
  ComplementComponents comps = complement_components(K);
  PoleSet L = validate_pole_set(K, comps, {cplx{0, 0}, std::nullopt});
  OracleFn g = fn1([](cplx z) { return 1.0 / (z - 0.1); }, 0.15);
  UnivariateReport rep;
  RationalUnivariate r = approximate_univariate(g, K, L, 1e-5, 0.08, &rep);
  CHECK(rep.sampled_error <= 1e-5);
  for (const auto& p : r.parts) CHECK(p.pole == cplx{0, 0});
  // independent dense check on the closed annulus
  double worst = 0;
  for (int a = 0; a <= 25; ++a)
    for (int b = 0; b < 90; ++b) {
      double rad = 0.5 + 0.5 * a / 25, t = 2 * 3.14159265358979 * b / 90;
      cplx z{rad * std::cos(t), rad * std::sin(t)};
      worst = std::max(worst, std::abs(1.0 / (z - 0.1) - r.eval(z)));
    }
  CHECK(worst <= 1.2e-5);
}

TEST_CASE("budgets stay sound for a family of random holomorphic functions") {
  PlanarCompact K = unit_disc();
  ComplementComponents comps = complement_components(K);
  PoleSet L = validate_pole_set(K, comps, {std::nullopt});
  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> mag(0.3, 2.0), arg(0, 2 * 3.141592653589793);
  int sound = 0;
  const int trials = 12;
  const double eps = 1e-3;
  for (int t = 0; t < trials; ++t) {
    // three simple poles at radius >= 1.5 plus a low-degree polynomial part
    std::vector<cplx> poles, coef;
    for (int p = 0; p < 3; ++p) {
      double a = arg(rng);
      double r = 1.5 + mag(rng);
      poles.push_back({r * std::cos(a), r * std::sin(a)});
      coef.push_back({mag(rng), mag(rng) - 1.0});
    }
    cplx lin{mag(rng), 0}, quad{0, mag(rng)};
    auto g = fn1([=](cplx z) {
      cplx acc = lin * z + quad * z * z;
      for (size_t p = 0; p < poles.size(); ++p) acc += coef[p] / (z - poles[p]);
      return acc;
    });
    RationalUnivariate r = approximate_univariate(g, K, L, eps, 0.12);
    // verify on a sample 4x finer than the one used for certification
    SamplePlan fine = sample_points(K, 2);
    double worst = 0;
    for (cplx z : fine.all)
      worst = std::max(worst, std::abs(g.at1(z) - r.eval(z)));
    if (worst <= eps) ++sound;
  }
  CHECK(sound >= trials - 1);
}
