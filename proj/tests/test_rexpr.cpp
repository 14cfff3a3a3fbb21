#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>

#include "rungekit/errors.hpp"
#include "rungekit/rexpr.hpp"

using namespace rungekit;

namespace {

RationalUnivariate part_only(int var, cplx pole, double scale,
                             std::vector<cplx> coeffs) {
  RationalUnivariate f;
  f.var = var;
  f.parts.push_back({pole, scale, std::move(coeffs)});
  return f;
}

// random evaluation points that stay a fixed distance away from every pole,
// so exact rational identities hold to roundoff
std::vector<cplx> probe_points(const std::vector<cplx>& poles, int n,
                               unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<cplx> out;
  while (static_cast<int>(out.size()) < n) {
    cplx z{u(rng), u(rng)};
    bool ok = true;
    for (cplx p : poles)
      if (std::abs(z - p) < 0.3) ok = false;
    if (ok) out.push_back(z);
  }
  return out;
}

}  // namespace

TEST_CASE("univariate pieces evaluate to hand values") {
  // 1/(z-2), stored with scale 1
  RationalUnivariate f = part_only(0, {2, 0}, 1.0, {cplx{1, 0}});
  CHECK(f.eval({0, 0}).real() == doctest::Approx(-0.5));
  CHECK(f.eval({0, 0}).imag() == doctest::Approx(0.0));
  CHECK(f.eval({3, 0}).real() == doctest::Approx(1.0));
  // same function stored with scale 2 and halved coefficient
  RationalUnivariate g = part_only(0, {2, 0}, 2.0, {cplx{0.5, 0}});
  for (cplx z : {cplx{0, 0}, cplx{1, 1}, cplx{-2, 0.5}})
    CHECK(std::abs(f.eval(z) - g.eval(z)) < 1e-15);
  CHECK_THROWS_WITH_AS(f.eval({2, 0}), doctest::Contains("PoleHit"), RkError);

  // 1 + 2u + u^2 with u = (z-1)/2 is ((z+1)/2)^2
  RationalUnivariate p;
  p.var = 0;
  p.center = {1, 0};
  p.radius = 2.0;
  p.poly = {cplx{1, 0}, cplx{2, 0}, cplx{1, 0}};
  CHECK(p.eval({3, 0}).real() == doctest::Approx(4.0));
  CHECK(p.eval({-1, 0}).real() == doctest::Approx(0.0));
  CHECK(p.eval({0, 2}).real() == doctest::Approx(-0.75));  // ((1+2i)/2)^2
  CHECK(p.eval({0, 2}).imag() == doctest::Approx(1.0));
  CHECK(p.poly_degree() == 2);
  CHECK(f.poly_degree() == -1);
  CHECK(f.max_part_order() == 1);
  CHECK_FALSE(f.is_constant());
  CHECK(RationalUnivariate::constant(0, {3, 1}).is_constant());
}

TEST_CASE("tensor expressions evaluate factorwise") {
  // (1/(z1-2)) * (1/(z2-3i)) at (0,0) = (-1/2)(i/3) = -i/6
  TensorRationalExpr e;
  e.dim = 2;
  TensorRationalExpr::Term t;
  t.scalar = {1, 0};
  t.factors.push_back(part_only(0, {2, 0}, 1.0, {cplx{1, 0}}));
  t.factors.push_back(part_only(1, {0, 3}, 1.0, {cplx{1, 0}}));
  e.terms.push_back(t);
  std::vector<cplx> z = {{0, 0}, {0, 0}};
  cplx v = e.eval(z);
  CHECK(v.real() == doctest::Approx(0.0));
  CHECK(v.imag() == doctest::Approx(-1.0 / 6.0));

  std::vector<cplx> wrong = {{0, 0}};
  CHECK_THROWS_WITH_AS(e.eval(wrong), doctest::Contains("DimensionMismatch"),
                       RkError);

  // plus/scaled are pointwise
  cplx v2 = e.plus(TensorRationalExpr::constant(2, {1, 0})).scaled({0, 2}).eval(z);
  CHECK(v2.real() == doctest::Approx(1.0 / 3.0));
  CHECK(v2.imag() == doctest::Approx(2.0));
}

TEST_CASE("univariate products match pointwise evaluation") {
  RationalUnivariate a;
  a.var = 0;
  a.center = {0, 0};
  a.radius = 1.0;
  a.poly = {cplx{1, 0}, cplx{0.5, -0.2}, cplx{-0.25, 0}};
  a.parts.push_back({{2, -1}, 1.5, {cplx{0.3, 0}, cplx{-0.1, 0.2}}});

  RationalUnivariate b;
  b.var = 0;
  b.center = {0.5, 0};
  b.radius = 2.0;
  b.poly = {cplx{-1, 0}, cplx{2, 0.3}};
  b.parts.push_back({{2, -1}, 0.7, {cplx{1.1, 0}}});
  b.parts.push_back({{-1, 0.5}, 1.0, {cplx{0.2, 0}, cplx{0, 0}, cplx{0, 0.4}}});

  RationalUnivariate ab = multiply_univariate(a, b);
  CHECK(ab.poly_degree() == 3);     // 2 + 1
  CHECK(ab.max_part_order() == 3);  // same-pole stacking: order 2 times order 1
  CHECK(ab.parts.size() == 2);

  for (cplx z : probe_points({{2, -1}, {-1, 0.5}}, 60, 71)) {
    cplx want = a.eval(z) * b.eval(z);
    CHECK(std::abs(ab.eval(z) - want) <= 1e-9 * (1.0 + std::abs(want)));
  }
}

TEST_CASE("same-pole products stack orders across scales") {
  // (2/(z-1)) * (3/(z-1)) = 6/(z-1)^2
  RationalUnivariate a = part_only(0, {1, 0}, 2.0, {cplx{1, 0}});
  RationalUnivariate b = part_only(0, {1, 0}, 3.0, {cplx{1, 0}});
  RationalUnivariate ab = multiply_univariate(a, b);
  REQUIRE(ab.parts.size() == 1);
  CHECK(ab.poly_degree() == -1);
  REQUIRE(ab.parts[0].coeffs.size() == 2);
  CHECK(std::abs(ab.parts[0].coeffs[0]) < 1e-15);
  cplx z{4, 1};
  cplx want = 6.0 / ((z - cplx{1, 0}) * (z - cplx{1, 0}));
  CHECK(std::abs(ab.eval(z) - want) < 1e-14);
}

TEST_CASE("two simple poles split into the classic partial fractions") {
  // 1/((z-1)(z+1)) = (1/2)/(z-1) - (1/2)/(z+1)
  RationalUnivariate a = part_only(0, {1, 0}, 1.0, {cplx{1, 0}});
  RationalUnivariate b = part_only(0, {-1, 0}, 1.0, {cplx{1, 0}});
  RationalUnivariate ab = multiply_univariate(a, b);
  REQUIRE(ab.parts.size() == 2);
  for (const auto& p : ab.parts) {
    REQUIRE(p.coeffs.size() == 1);
    double want = p.pole.real() > 0 ? 0.5 : -0.5;
    CHECK(p.coeffs[0].real() == doctest::Approx(want));
    CHECK(p.coeffs[0].imag() == doctest::Approx(0.0));
  }
}

TEST_CASE("derivatives agree with centered differences") {
  RationalUnivariate f;
  f.var = 0;
  f.center = {0.5, 0.5};
  f.radius = 1.5;
  f.poly = {cplx{0.2, 0}, cplx{-1, 0.4}, cplx{0, 0.7}, cplx{0.3, 0}};
  f.parts.push_back({{2, 0}, 1.0, {cplx{1, 0}, cplx{0, -0.5}}});
  f.parts.push_back({{-1, -1}, 0.8, {cplx{0.6, 0.1}}});

  RationalUnivariate df = f.derivative();
  const double h = 1e-5;
  for (cplx z : probe_points({{2, 0}, {-1, -1}}, 40, 5)) {
    cplx fd = (f.eval(z + cplx{h, 0}) - f.eval(z - cplx{h, 0})) / (2 * h);
    CHECK(std::abs(df.eval(z) - fd) <= 1e-5 * (1.0 + std::abs(fd)));
  }

  // exact spot check: d/dz 1/(z-2) = -1/(z-2)^2 at the origin
  RationalUnivariate g = part_only(0, {2, 0}, 1.0, {cplx{1, 0}});
  CHECK(g.derivative().eval({0, 0}).real() == doctest::Approx(-0.25));
}

TEST_CASE("add_in merges matching parts and adopts empty bases") {
  RationalUnivariate f = part_only(0, {1, 0}, 2.0, {cplx{1, 0}});
  RationalUnivariate g = part_only(0, {1, 0}, 2.0, {cplx{0, 0}, cplx{3, 0}});
  g.center = {0, 0};
  g.radius = 1.0;
  g.poly = {cplx{5, 0}};
  f.add_in(g);
  REQUIRE(f.parts.size() == 1);
  REQUIRE(f.parts[0].coeffs.size() == 2);
  CHECK(f.parts[0].coeffs[0] == cplx{1, 0});
  CHECK(f.parts[0].coeffs[1] == cplx{3, 0});
  CHECK(f.poly_degree() == 0);
  cplx z{3, 0};
  // coeffs are against (2/(z-1))^m, so the merged tail is 3*(2/(z-1))^2
  cplx want = 2.0 / (z - 1.0) + 12.0 / ((z - 1.0) * (z - 1.0)) + 5.0;
  CHECK(std::abs(f.eval(z) - want) < 1e-14);

  // distinct poles just concatenate
  f.add_in(part_only(0, {0, 5}, 1.0, {cplx{1, 0}}));
  CHECK(f.parts.size() == 2);
}

TEST_CASE("variable collisions in tensor products are rejected") {
  TensorRationalExpr a = TensorRationalExpr::from_univariate(
      2, part_only(0, {2, 0}, 1.0, {cplx{1, 0}}));
  TensorRationalExpr b = TensorRationalExpr::from_univariate(
      2, part_only(0, {3, 0}, 1.0, {cplx{1, 0}}));
  CHECK_THROWS_WITH_AS(a.product(b),
                       doctest::Contains("VariableCollisionInProduct"), RkError);

  TensorRationalExpr c = TensorRationalExpr::from_univariate(
      2, part_only(1, {3, 0}, 1.0, {cplx{1, 0}}));
  TensorRationalExpr ac = a.product(c);
  REQUIRE(ac.terms.size() == 1);
  REQUIRE(ac.terms[0].factors.size() == 2);
  CHECK(ac.terms[0].factors[0].var == 0);
  CHECK(ac.terms[0].factors[1].var == 1);
}

TEST_CASE("pole inventory deduplicates and spots polynomial growth") {
  TensorRationalExpr e;
  e.dim = 2;
  TensorRationalExpr::Term t1, t2;
  t1.factors.push_back(part_only(0, {2, 0}, 1.0, {cplx{1, 0}}));
  t1.factors.push_back(part_only(1, {0, 1}, 1.0, {cplx{1, 0}}));
  t2.factors.push_back(part_only(0, {2, 0}, 1.0, {cplx{0, 3}}));  // same pole again
  RationalUnivariate growth;
  growth.var = 1;
  growth.poly = {cplx{0, 0}, cplx{1, 0}};  // nonconstant polynomial part
  t2.factors.push_back(growth);
  e.terms = {t1, t2};

  auto vp = poles_of(e);
  REQUIRE(vp.size() == 2);
  REQUIRE(vp[0].finite.size() == 1);
  CHECK(vp[0].finite[0] == cplx{2, 0});
  CHECK_FALSE(vp[0].infinity);
  REQUIRE(vp[1].finite.size() == 1);
  CHECK(vp[1].finite[0] == cplx{0, 1});
  CHECK(vp[1].infinity);

  // a part whose coefficients are all zero is not a pole
  TensorRationalExpr dead = TensorRationalExpr::from_univariate(
      1, part_only(0, {7, 0}, 1.0, {cplx{0, 0}}));
  CHECK(poles_of(dead)[0].finite.empty());
}

TEST_CASE("JSON round trips reproduce every coefficient bit for bit") {
  TensorRationalExpr e;
  e.dim = 2;
  TensorRationalExpr::Term t;
  t.scalar = {1.0 / 3.0, -std::sqrt(2.0)};
  RationalUnivariate f;
  f.var = 0;
  f.center = {0.1, -0.7};
  f.radius = std::acos(-1.0);
  f.poly = {cplx{2.0 / 7.0, 0}, cplx{0, 1e-17}, cplx{1e300, -3e-12}};
  f.parts.push_back({{2, -1}, 1.5, {cplx{0.3, 0}, cplx{-0.1, 0.2}}});
  t.factors.push_back(f);
  t.factors.push_back(part_only(1, {0, 1.0 / 3.0}, 0.25, {cplx{5, -5}}));
  e.terms.push_back(t);

  std::string text = expr_to_json(e);
  TensorRationalExpr back = expr_from_json(text);
  REQUIRE(back.dim == e.dim);
  REQUIRE(back.terms.size() == e.terms.size());
  auto same = [](cplx x, cplx y) {
    return std::memcmp(&x, &y, sizeof x) == 0;
  };
  for (size_t i = 0; i < e.terms.size(); ++i) {
    CHECK(same(back.terms[i].scalar, e.terms[i].scalar));
    REQUIRE(back.terms[i].factors.size() == e.terms[i].factors.size());
    for (size_t j = 0; j < e.terms[i].factors.size(); ++j) {
      const auto& x = e.terms[i].factors[j];
      const auto& y = back.terms[i].factors[j];
      CHECK(y.var == x.var);
      CHECK(same(y.center, x.center));
      CHECK(std::memcmp(&y.radius, &x.radius, sizeof(double)) == 0);
      REQUIRE(y.poly.size() == x.poly.size());
      for (size_t k = 0; k < x.poly.size(); ++k) CHECK(same(y.poly[k], x.poly[k]));
      REQUIRE(y.parts.size() == x.parts.size());
      for (size_t k = 0; k < x.parts.size(); ++k) {
        CHECK(same(y.parts[k].pole, x.parts[k].pole));
        REQUIRE(y.parts[k].coeffs.size() == x.parts[k].coeffs.size());
        for (size_t m = 0; m < x.parts[k].coeffs.size(); ++m)
          CHECK(same(y.parts[k].coeffs[m], x.parts[k].coeffs[m]));
      }
    }
  }
  // serialization itself is deterministic
  CHECK(expr_to_json(back) == text);

  CHECK_THROWS_WITH_AS(expr_from_json("{not json"), doctest::Contains("SyntaxError"),
                       RkError);
  CHECK_THROWS_WITH_AS(expr_from_json("{\"dim\": 1}"),
                       doctest::Contains("SyntaxError"), RkError);
}
