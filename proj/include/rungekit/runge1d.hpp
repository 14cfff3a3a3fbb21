#pragma once
#include <memory>
#include <optional>

#include "rungekit/geometry.hpp"
#include "rungekit/oracle.hpp"
#include "rungekit/rexpr.hpp"

namespace rungekit {

// One quadrature node: zeta sits on a cycle edge, weight = (Gauss-Legendre
// panel weight) * (edge vector)/(2 pi i), so summing weight * g(zeta)/(zeta-z)
// discretizes the Cauchy integral.
struct QuadNode {
  cplx zeta;
  cplx weight;
};

struct CauchyQuadrature {
  std::vector<QuadNode> nodes;
  std::vector<cplx> gvals;   // g at the nodes (filled by cauchy_quadrature)
  int level = 0;             // refinement steps applied on top of the base
  double sampled_error = 0;  // certified sup over the sample of |g - sum|
  double loop_closure = 0;   // max |sum of edges| per loop; 0 up to roundoff
};

// Hard limits shared by the 1-D machinery; defaults match the CLI.
struct RungeLimits {
  int base_nodes = 16;           // per-loop node count at level 0
  int max_quad_level = 14;
  size_t max_quad_nodes = 1u << 15;
  int degree_cap = 500;          // per univariate factor
  int start_quad_level = 0;      // refinement warm start; callers running many
                                 // similar integrals seed it from the last one
};

// Nodes/weights for one refinement level: one Gauss-Legendre panel per cycle
// edge, a budget of base_nodes * 2^level points per loop split across edges
// by length (with a level+1 floor per edge).  Panels see an analytic
// integrand on a straight segment, so the error decays geometrically in the
// level rather than quadratically as equal-arclength midpoints would.
CauchyQuadrature quadrature_at_level(const Cycle& gamma, int level,
                                         int base_nodes = 16);

// Raises the level until sup_{z in sample(K)} |g(z) - sum_k
// weight_k g(zeta_k)/(zeta_k - z)| <= eps_half, certifying on the standard
// sample plan.  Throws RefinementLimitExceeded when the limits are hit and
// CycleTooCloseToSet when a node sits closer to K than one grid pitch.
CauchyQuadrature cauchy_quadrature(const OracleFn& g, const PlanarCompact& K,
                                        const Cycle& gamma, double eps_half,
                                        const RungeLimits& lim = {});

// r(z) ~ 1/(zeta - z) with poles only at `target` (nullopt = infinity) and
// sup_K |1/(zeta-z) - r(z)| <= eps.  The pole is relocated stepwise along a
// grid path, each hop re-expanding the principal part with a binomial series
// whose certified tail fits the per-step budget eps * 2^{-step-1}.
RationalUnivariate push_pole(cplx zeta, const PlanarCompact& K,
                             std::optional<cplx> target, double eps,
                             const RungeLimits& lim = {});

// Same, reusing a prebuilt reach tree (one per complement component) so a
// quadrature's worth of pushes shares the plumbing.
RationalUnivariate push_pole_along(cplx zeta, const PlanarCompact& K,
                                   const ReachTree& tree,
                                   std::optional<cplx> target, double eps,
                                   const RungeLimits& lim = {});

// Least-squares projection onto the rational basis of a single pole target:
// a constant plus powers of the scaled reciprocal at a finite pole, or
// scaled monomials for infinity.  One fitter serves many right-hand sides
// over the same sample set, reusing the factorization per basis size; the
// residual is certified against every sample, not just the solve rows.
// Complements the analytic relocation when a stepwise push would need degree
// beyond the cap (transport into eccentric finite targets, mostly).
class RationalLsFitter {
 public:
  RationalLsFitter(const PlanarCompact& K, std::optional<cplx> target,
                   std::vector<cplx> samples, const RungeLimits& lim = {});
  ~RationalLsFitter();
  RationalLsFitter(RationalLsFitter&&) noexcept;
  RationalLsFitter& operator=(RationalLsFitter&&) noexcept;

  // values[i] belongs to samples[i]; the fit's certified sup gap over the
  // samples must come in under the budget, else BudgetOverflow.
  RationalUnivariate fit(const std::vector<cplx>& values, double budget) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct UnivariateReport {
  double quad_error = 0;    // sampled Riemann-sum error (<= eps/2)
  double push_budget = 0;   // analytic bound spent on pole relocation
  double sampled_error = 0; // final measured sup over the sample
  cplx argmax{0, 0};
  size_t samples = 0;
  int nodes = 0;            // quadrature nodes M
  int quad_level = 0;
  int max_degree = 0;       // max polynomial degree / principal-part order
};

// Full 1-D pipeline: cycle at dilation delta, Riemann sum (eps/2), then each
// kernel 1/(zeta_k - z) pushed into the pole assigned to its component with
// per-node budgets (eps/2 total), assembled into one rational function.
RationalUnivariate approximate_univariate(const OracleFn& g, const PlanarCompact& K,
                                          const PoleSet& L, double eps,
                                          double delta,
                                          UnivariateReport* rep = nullptr,
                                          const RungeLimits& lim = {});

}  // namespace rungekit
