#pragma once
#include <optional>
#include <vector>

#include "rungekit/geometry.hpp"
#include "rungekit/oracle.hpp"
#include "rungekit/rexpr.hpp"
#include "rungekit/runge1d.hpp"

namespace rungekit {

// One coordinate of a product domain: the compact that variable lives on,
// the admissible poles for that variable, and the cycle standoff used when
// the coordinate gets integrated out.  factors[i] is the home of z_{i+1}.
struct ProductFactor {
  PlanarCompact K;
  PoleSet L;
  double delta = 0.1;
};

struct ProductDomain {
  std::vector<ProductFactor> factors;
  int dim() const { return static_cast<int>(factors.size()); }
};

// Error accounting for one recursion level.  quad_error is measured on the
// probe slices; push_budget and rec_budget are the analytic claims handed to
// pole relocation and to the lower-dimensional calls.  rec_budget already
// covers everything the deeper rows describe, so the certificate for the
// whole run is row 0 plus its dropped mass -- deeper rows are a breakdown of
// row 0's rec_budget, not additional error.
struct LevelLedger {
  int var = 0;
  double quad_error = 0;
  double push_budget = 0;
  double rec_budget = 0;
  double dropped = 0;  // coefficient mass removed by term pruning
  int nodes = 0;
  int quad_level = 0;
};

struct ApproxReport {
  double eps = 0;
  double sampled_error = 0;  // sup of |f - p| over the product sample
  std::vector<cplx> argmax;  // tuple achieving it, variable order
  size_t samples = 0;
  size_t terms = 0;
  double ledger_total = 0;  // row-0 entries + dropped; <= eps by construction
  double dropped_total = 0;
  std::vector<LevelLedger> levels;
  // Filled by approximate_with_derivatives: one row per multi-index, the
  // measured gap between the differentiated approximant and finite
  // differences of the oracle at the probe tuples.
  std::vector<std::vector<int>> deriv_orders;
  std::vector<double> deriv_errors;
};

struct TensorLimits {
  RungeLimits runge;
  size_t max_terms = 1000000;
  size_t report_samples = 40000;  // target size of the product sample
  // Order the coordinates are integrated out in; must be a permutation of
  // 0..d-1.  Empty means d-1, d-2, ..., 0 (last coordinate first).
  std::vector<int> perm;
};

// Tensor-product pipeline: a one-term-deep Cauchy discretization in the
// next coordinate turns f into a sum of slice functions times univariate
// kernels; slices recurse, kernels get their poles pushed into that
// coordinate's admissible set.  d = 1 is exactly approximate_univariate.
TensorRationalExpr approximate_product(const OracleFn& f, const ProductDomain& dom,
                                       double eps, ApproxReport* rep = nullptr,
                                       const TensorLimits& lim = {});

// Same output contract, but the construction runs on margin/4-enlarged
// factors with a budget shrunk by delta^A / A! (A = d * max order), so
// Cauchy estimates certify every mixed derivative with orders drawn from
// `orders` up to eps on the original domain.  orders = {0} reproduces
// approximate_product exactly.
TensorRationalExpr approximate_with_derivatives(
    const OracleFn& f, const ProductDomain& dom, double eps,
    const std::vector<int>& orders, ApproxReport* rep = nullptr,
    const TensorLimits& lim = {});

// Approximation of f(z, w) along the graph w = omega(z) over a single
// factor: the pullback z -> f(z, omega(z)) is checked for holomorphy on an
// interior patch (PullbackNotHolomorphic otherwise), then approximated as a
// univariate function of z.  The result Q(z, w) = q(z) is returned as q.
RationalUnivariate approximate_on_graph(const OracleFn& f_graph,
                                        const OracleFn& omega,
                                        const ProductFactor& base, double eps,
                                        ApproxReport* rep = nullptr,
                                        const TensorLimits& lim = {});

}  // namespace rungekit
