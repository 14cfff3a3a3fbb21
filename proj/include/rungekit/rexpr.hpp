#pragma once
#include <span>
#include <string>
#include <vector>

#include "rungekit/grid.hpp"

namespace rungekit {

// One principal part: coeffs[m-1] multiplies v^m with v = scale/(z-pole) -
// shift.  The frame (scale, shift) is chosen so |v| stays ~1 on the set the
// part was built over; shift 0 with scale = dist(pole, K) is the plain case,
// a nonzero shift recenters the Moebius image of the set when the pole sits
// far away and plain powers of scale/(z-pole) would be numerically dependent.
struct PrincipalPart {
  cplx pole;
  double scale = 1.0;
  std::vector<cplx> coeffs;
  cplx shift{0, 0};
};

// Rational function of a single coordinate: polynomial part in powers of
// (z-center)/radius plus principal parts at finite poles.
struct RationalUnivariate {
  int var = 0;
  cplx center{0, 0};
  double radius = 1.0;
  std::vector<cplx> poly;  // poly[t] multiplies ((z-center)/radius)^t
  std::vector<PrincipalPart> parts;

  cplx eval(cplx z) const;  // throws PoleHit when z hits a pole exactly
  int poly_degree() const;  // highest nonzero power, -1 when none
  int max_part_order() const;
  bool is_constant() const;
  RationalUnivariate derivative() const;
  void scale_by(cplx s);
  void trim();  // drop zero tails / empty parts

  // accumulate `o` (same var) into *this; bases must match for the
  // polynomial part unless one side has none
  void add_in(const RationalUnivariate& o);
  static RationalUnivariate constant(int var, cplx value);
};

// product of two rationals in the same variable, re-expanded into polynomial
// + principal parts (partial fractions).   Throws BudgetOverflow if pole
// geometry makes the expansion numerically meaningless.
RationalUnivariate multiply_univariate(const RationalUnivariate& a,
                                       const RationalUnivariate& b);

// Finite sum of products of univariate rationals in pairwise distinct
// variables; the canonical output format of every approximation routine.
struct TensorRationalExpr {
  struct Term {
    cplx scalar{1, 0};
    std::vector<RationalUnivariate> factors;  // strictly increasing var index
  };
  int dim = 0;
  std::vector<Term> terms;

  cplx eval(std::span<const cplx> z) const;
  size_t term_count() const { return terms.size(); }

  TensorRationalExpr plus(const TensorRationalExpr& o) const;
  TensorRationalExpr scaled(cplx s) const;
  // tensor product; variable sets of every term pair must be disjoint
  TensorRationalExpr product(const TensorRationalExpr& o) const;

  static TensorRationalExpr constant(int dim, cplx value);
  static TensorRationalExpr from_univariate(int dim, RationalUnivariate f);
};

// Poles used per variable; `infinity` records a nonconstant polynomial part.
struct VarPoles {
  std::vector<cplx> finite;  // deduplicated, bit-exact comparison
  bool infinity = false;
};
std::vector<VarPoles> poles_of(const TensorRationalExpr& e);

std::string expr_to_json(const TensorRationalExpr& e, bool pretty = false);
TensorRationalExpr expr_from_json(const std::string& json_text);
std::string expr_pretty(const TensorRationalExpr& e);

}  // namespace rungekit
