#include "rungekit/runge1d.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>

namespace rungekit {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kStepRatio = 0.49;  // |p'-p| <= kStepRatio * dist(p', K)
// the distance field is 1-Lipschitz, so an admissible hop can change the
// clearance by at most  1/1.49 <= dist(p')/dist(p) <= 1/0.51;  these bounds
// are sanity asserts, not extra constraints.  (Capping the growth tighter
// is tempting but wrong: rebasing at less than the full Lipschitz growth
// makes the coefficient decay ratio r + rho*s/s' creep past 1 and the
// retained degree explode hop over hop.)
constexpr double kScaleLo = 0.67;
constexpr double kScaleHi = 1.97;
constexpr double kInfRatio = 0.55;   // walk outward until R/|p-c| <= this
                                     // before a multi-order polynomial
                                     // conversion (keeps the binomial bulge
                                     // near 2x the incoming order)
constexpr double kJumpRatio = 0.95;  // |p-target| <= kJumpRatio * dist(target)
                                     // lets a walk finish in one expansion

// ------------------------------------------------------------- quadrature

// Gauss-Legendre nodes and weights on [-1,1], Newton iteration on the
// three-term recurrence.  Orders repeat heavily across panels (every short
// boundary edge at a given level shares one), so rules are cached by order.
struct GlRule {
  std::vector<double> x, w;
};

const GlRule& gauss_legendre(int m) {
  static std::map<int, GlRule> cache;
  auto hit = cache.find(m);
  if (hit != cache.end()) return hit->second;
  GlRule r;
  r.x.resize(m);
  r.w.resize(m);
  for (int k = 0; k < (m + 1) / 2; ++k) {
    double x = std::cos(kPi * (k + 0.75) / (m + 0.5));
    double dp = 1;
    for (int pass = 0; pass < 64; ++pass) {
      double p0 = 1, p1 = x;
      for (int j = 2; j <= m; ++j) {
        double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = (m == 1) ? 1.0 : m * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1 - x * x) * dp * dp);
    r.x[k] = -x;
    r.x[m - 1 - k] = x;
    r.w[k] = w;
    r.w[m - 1 - k] = w;
  }
  // pin the total mass to exactly 2 so panel weight sums telescope to the
  // chord and loop closures stay at zero instead of O(nodes * eps)
  double s = 0;
  for (double w : r.w) s += w;
  for (double& w : r.w) w *= 2.0 / s;
  return cache.emplace(m, std::move(r)).first->second;
}

double sum_error(const std::vector<QuadNode>& nodes,
                 const std::vector<cplx>& prod, const std::vector<cplx>& at,
                 const std::vector<cplx>& gat, cplx* argmax) {
  double worst = -1;
  // flat tables keep the sweep in registers; a std::complex division here
  // would cost a library call per node/sample pair
  size_t K = nodes.size();
  std::vector<double> zr(K), zi(K), pr(K), pi(K);
  for (size_t k = 0; k < K; ++k) {
    zr[k] = nodes[k].zeta.real();
    zi[k] = nodes[k].zeta.imag();
    pr[k] = prod[k].real();
    pi[k] = prod[k].imag();
  }
  for (size_t i = 0; i < at.size(); ++i) {
    double xr = at[i].real(), xi = at[i].imag();
    double ar = 0, ai = 0;
    for (size_t k = 0; k < K; ++k) {
      double dr = zr[k] - xr, di = zi[k] - xi;
      double inv = 1.0 / (dr * dr + di * di);
      ar += (pr[k] * dr + pi[k] * di) * inv;
      ai += (pi[k] * dr - pr[k] * di) * inv;
    }
    double er = gat[i].real() - ar, ei = gat[i].imag() - ai;
    double e = std::sqrt(er * er + ei * ei);
    if (e > worst) {
      worst = e;
      if (argmax) *argmax = at[i];
    }
  }
  return worst;
}

}  // namespace

CauchyQuadrature quadrature_at_level(const Cycle& gamma, int level,
                                         int base_nodes) {
  CauchyQuadrature q;
  q.level = level;
  const cplx two_pi_i{0, 2 * kPi};
  for (const auto& loop : gamma.loops) {
    if (loop.pts.size() < 3 || loop.length <= 0) continue;
    // One Gauss-Legendre panel per polygon edge: the integrand is analytic
    // on every straight piece, so there is no corner penalty and the error
    // decays geometrically in the panel order.  A budget of base_nodes *
    // 2^level points per loop is split across edges by length; the additive
    // level+1 floor keeps refinement moving on loops with many short edges,
    // where proportional shares round to one point for several levels.
    double target = static_cast<double>(base_nodes) * std::ldexp(1.0, level);
    cplx closure = 0;
    size_t n = loop.pts.size();
    for (size_t j = 0; j < n; ++j) {
      cplx a = loop.pts[j], b = loop.pts[(j + 1) % n];
      cplx chord = b - a;
      double len = std::abs(chord);
      if (len <= 0) continue;
      closure += chord;
      int m = std::max(level + 1,
                       static_cast<int>(std::ceil(target * len / loop.length)));
      const GlRule& gl = gauss_legendre(m);
      for (int k = 0; k < m; ++k)
        q.nodes.push_back({a + 0.5 * (gl.x[k] + 1.0) * chord,
                           0.5 * gl.w[k] * chord / two_pi_i});
    }
    q.loop_closure = std::max(q.loop_closure, std::abs(closure));
  }
  return q;
}

CauchyQuadrature cauchy_quadrature(const OracleFn& g, const PlanarCompact& K,
                                        const Cycle& gamma, double eps_half,
                                        const RungeLimits& lim) {
  if (!(eps_half > 0))
    fail(ErrorCode::PreconditionViolated, "quadrature budget must be positive");
  SamplePlan plan = sample_points(K, 1);
  if (plan.all.empty())
    fail(ErrorCode::PreconditionViolated, "compact has no sample points");

  std::vector<cplx> gfull(plan.all.size());
  for (size_t i = 0; i < plan.all.size(); ++i) gfull[i] = g.at1(plan.all[i]);

  // coarse steering subset drives refinement; the full plan certifies
  size_t stride = std::max<size_t>(1, plan.all.size() / 600);
  std::vector<cplx> steer, gsteer;
  for (size_t i = 0; i < plan.all.size(); i += stride) {
    steer.push_back(plan.all[i]);
    gsteer.push_back(gfull[i]);
  }

  double best = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (int level = std::clamp(lim.start_quad_level, 0, lim.max_quad_level);;
       ++level) {
    size_t projected = gamma.loops.size() *
                       (static_cast<size_t>(lim.base_nodes) << level);
    if (level > lim.max_quad_level || projected > lim.max_quad_nodes)
      fail(ErrorCode::RefinementLimitExceeded,
           "contour quadrature stuck at error " + std::to_string(best) +
               " (level " + std::to_string(level) + "), wanted " +
               std::to_string(eps_half));

    CauchyQuadrature q = quadrature_at_level(gamma, level, lim.base_nodes);
    if (q.nodes.size() > lim.max_quad_nodes)
      fail(ErrorCode::RefinementLimitExceeded,
           "contour quadrature hit the node cap at error " +
               std::to_string(best) + ", wanted " + std::to_string(eps_half));
    for (const auto& n : q.nodes)
      if (K.distance(n.zeta) < K.pitch())
        fail(ErrorCode::CycleTooCloseToSet,
             "quadrature node within one pitch of the set");

    q.gvals.resize(q.nodes.size());
    std::vector<cplx> prod(q.nodes.size());
    for (size_t k = 0; k < q.nodes.size(); ++k) {
      q.gvals[k] = g.at1(q.nodes[k].zeta);
      prod[k] = q.nodes[k].weight * q.gvals[k];
    }

    double es = sum_error(q.nodes, prod, steer, gsteer, nullptr);
    if (es <= 0.8 * eps_half) {
      double ef = sum_error(q.nodes, prod, plan.all, gfull, nullptr);
      if (ef <= eps_half) {
        q.sampled_error = ef;
        return q;
      }
    }
    if (es > 0.9 * best) {
      if (++stall >= 2)
        fail(ErrorCode::RefinementLimitExceeded,
             "contour quadrature no longer improving (error " +
                 std::to_string(es) + ", wanted " + std::to_string(eps_half) +
                 ")");
    } else {
      stall = 0;
    }
    best = std::min(best, es);
  }
}

// ------------------------------------------------------------ pole pushing

namespace {

struct PushState {
  cplx p;               // current pole
  double s;             // certified clearance of p, the stored scale
  std::vector<cplx> a;  // a[m-1] multiplies (s/(z-p))^m
};

// Smallest number of kept terms n with lead * r^n / (1-r) <= budget: the
// certified tail of a plain geometric series lead * sum r^j.  Order-1
// relocations and polynomial conversions are exactly this shape, so the
// value doubles as an a-priori degree estimate.
int geom_terms(double lead, double r, double budget) {
  if (!(lead > 0)) return 0;
  if (!(r < 1) || !(budget > 0)) return std::numeric_limits<int>::max();
  double need = std::log(lead / ((1 - r) * budget)) / std::log(1 / r);
  if (need <= 0) return 0;
  if (need >= 1e7) return std::numeric_limits<int>::max();
  return static_cast<int>(need) + 1;
}

// Expands a_m (s_old/(z-p_old))^m around the new pole, accumulating into b
// (coefficients against (s_new/(z-p_new))^k).  x = (p_old-p_new)/s_new with
// |x| <= kStepRatio; fac = (s_old/s_new)^m.  The dropped tail is certified
// <= tail_budget using the fact that term ratios r(m+j)/(j+1) decrease in j.
bool expand_hop_term(cplx am, int m, double fac, cplx x, double r,
                     std::vector<cplx>& b, double tail_budget, int cap) {
  double lead = std::abs(am) * fac;
  if (lead == 0) return true;
  if (!std::isfinite(lead)) return false;
  cplx cur = am * fac;
  double tj = 1.0;  // C(m+j-1, j) r^j
  for (int j = 0;; ++j) {
    int k = m + j;
    if (k > cap) return false;
    if (static_cast<int>(b.size()) < k) b.resize(k, cplx{0, 0});
    b[k - 1] += cur;
    double mj = static_cast<double>(m + j);
    double t_next = tj * (r * mj / (j + 1.0));
    double ratio_after = r * (mj + 1.0) / (j + 2.0);
    if (ratio_after < 1.0 && lead * t_next / (1.0 - ratio_after) <= tail_budget)
      return true;
    cur *= x * (mj / (j + 1.0));
    tj = t_next;
  }
}

// Relocate the pole one step, spending half the budget on series tails and
// half on dropping now-negligible high orders.  Callers are responsible for
// keeping |p - pnew| / snew < 1; admissible hops stay below kStepRatio, the
// terminal jump below kJumpRatio.
void hop_core(PushState& st, cplx pnew, double snew, double budget, int cap) {
  cplx x = (st.p - pnew) / snew;
  double r = std::abs(x);
  int live = 0;
  for (cplx am : st.a)
    if (am != cplx{0, 0}) ++live;
  std::vector<cplx> b;
  if (live > 0) {
    double per_m = 0.5 * budget / live;
    for (size_t m = 1; m <= st.a.size(); ++m) {
      if (st.a[m - 1] == cplx{0, 0}) continue;
      double fac = std::pow(st.s / snew, static_cast<double>(m));
      if (!expand_hop_term(st.a[m - 1], static_cast<int>(m), fac, x, r, b,
                           per_m, cap))
        fail(ErrorCode::BudgetOverflow,
             "pole relocation needs degree beyond the cap of " +
                 std::to_string(cap));
    }
    // retruncation: drop high orders while their worst-case contribution
    // (|s/(z-p)| <= 1 on K) fits the other half of the budget
    double slack = 0.5 * budget;
    while (!b.empty() && std::abs(b.back()) <= slack) {
      slack -= std::abs(b.back());
      b.pop_back();
    }
  }
  st.p = pnew;
  st.s = snew;
  st.a = std::move(b);
}

void hop(PushState& st, cplx pnew, double snew, double budget, int cap) {
  double r = std::abs(st.p - pnew) / snew;
  if (r > 0.5 * (1 + 1e-9))
    fail(ErrorCode::Internal, "inadmissible pole hop planned");
  // order-1 states are scale-free (the 1/s factors cancel), so the
  // Lipschitz band on clearance ratios only binds once real rebasing starts
  if (st.a.size() > 1 && (snew / st.s < kScaleLo * (1 - 1e-9) ||
                          snew / st.s > kScaleHi * (1 + 1e-9)))
    fail(ErrorCode::Internal, "pole hop outside the clearance band");
  hop_core(st, pnew, snew, budget, cap);
}

// Dry run of expand_hop_term: the order k = m+j the series reaches before
// its certified tail fits the budget, or cap+1 when it would spill past.
int expand_reach(double lead, int m, double r, double tail_budget, int cap) {
  if (lead == 0) return 0;
  if (!std::isfinite(lead) || !(r < 1)) return cap + 1;
  if (static_cast<double>(m) / (1 - r) > static_cast<double>(cap) + 1)
    return cap + 1;  // the ratio test cannot even pass below the cap
  double tj = 1.0;
  for (int j = 0;; ++j) {
    int k = m + j;
    if (k > cap) return cap + 1;
    double mj = static_cast<double>(m + j);
    double t_next = tj * (r * mj / (j + 1.0));
    double ratio_after = r * (mj + 1.0) / (j + 2.0);
    if (ratio_after < 1.0 && lead * t_next / (1.0 - ratio_after) <= tail_budget)
      return k;
    tj = t_next;
  }
}

// Final step for targets at infinity: expand every (s/(z-p))^m into powers
// of u = (z-c)/R, valid on K since |u| <= 1 there and |R/(p-c)| < 1.
std::vector<cplx> convert_to_polynomial(const PushState& st, cplx c, double R,
                                        double budget, int cap) {
  cplx pc = st.p - c;
  cplx qc = R / pc;
  double r = std::abs(qc);
  if (!(r < 1))
    fail(ErrorCode::Internal, "polynomial conversion from inside the basis disc");
  int live = 0;
  for (cplx am : st.a)
    if (am != cplx{0, 0}) ++live;
  std::vector<cplx> poly;
  if (live == 0) return poly;
  double per_m = budget / live;
  cplx base = -st.s / pc;
  double ab = std::abs(base);
  for (size_t m = 1; m <= st.a.size(); ++m) {
    cplx am = st.a[m - 1];
    if (am == cplx{0, 0}) continue;
    cplx bm{1, 0};
    for (size_t t = 0; t < m; ++t) bm *= base;
    double lead = std::abs(am) * std::pow(ab, static_cast<double>(m));
    if (!std::isfinite(lead))
      fail(ErrorCode::BudgetOverflow, "polynomial conversion overflowed");
    cplx cur = am * bm;
    double tj = 1.0;
    for (int j = 0;; ++j) {
      if (j > cap)
        fail(ErrorCode::BudgetOverflow,
             "polynomial conversion needs degree beyond the cap of " +
                 std::to_string(cap));
      if (static_cast<int>(poly.size()) <= j) poly.resize(j + 1, cplx{0, 0});
      poly[j] += cur;
      double mj = static_cast<double>(m) + j;
      double t_next = tj * (r * mj / (j + 1.0));
      double ratio_after = r * (mj + 1.0) / (j + 2.0);
      if (ratio_after < 1.0 && lead * t_next / (1.0 - ratio_after) <= per_m)
        break;
      cur *= qc * (mj / (j + 1.0));
      tj = t_next;
    }
  }
  return poly;
}

using Route = std::vector<std::pair<cplx, double>>;  // (point, cert clearance)

bool hop_ok(cplx p, double sp, cplx q, double sq) {
  return sq > 0 && std::abs(q - p) <= kStepRatio * sq && sq >= kScaleLo * sp &&
         sq <= kScaleHi * sp;
}

// Greedy hop planning along tree waypoints: always take the farthest
// waypoint reachable in one admissible hop; when even the next one is out
// of reach, bisect toward it (the distance field is 1-Lipschitz, so the
// bisection terminates).
Route plan_route(const std::vector<cplx>& wp, const PlanarCompact& K) {
  Route route;
  route.emplace_back(wp[0], K.distance(wp[0]));
  std::vector<double> wd(wp.size());
  for (size_t i = 0; i < wp.size(); ++i) wd[i] = K.distance(wp[i]);
  size_t i = 0;
  int guard = 0;
  while (i + 1 < wp.size()) {
    if (++guard > 4000)
      fail(ErrorCode::Internal, "pole route is not making progress");
    auto [cur, scur] = route.back();
    size_t best = 0;
    for (size_t j = i + 1; j < wp.size(); ++j)
      if (hop_ok(cur, scur, wp[j], wd[j])) best = j;
    if (best > 0) {
      route.emplace_back(wp[best], wd[best]);
      i = best;
      continue;
    }
    cplx sub = wp[i + 1];
    bool advanced = false;
    for (int iter = 0; iter < 60; ++iter) {
      double ds = K.distance(sub);
      if (hop_ok(cur, scur, sub, ds)) {
        route.emplace_back(sub, ds);
        advanced = true;
        break;
      }
      sub = 0.5 * (cur + sub);
    }
    if (!advanced)
      fail(ErrorCode::Internal, "cannot subdivide a hop into admissible steps");
  }
  return route;
}

// Extends the route outward along the ray from c until the polynomial
// conversion ratio R/|p-c| holds.
void extend_outward(Route& route, const PlanarCompact& K, cplx c, double R) {
  int guard = 0;
  while (R / std::abs(route.back().first - c) > kInfRatio) {
    if (++guard > 500)
      fail(ErrorCode::Internal, "outward walk is not making progress");
    auto [cur, scur] = route.back();
    double lambda = 1.9;
    for (;;) {
      cplx q = c + (cur - c) * lambda;
      double dq = K.distance(q);
      if (hop_ok(cur, scur, q, dq)) {
        route.emplace_back(q, dq);
        break;
      }
      lambda = 1 + 0.5 * (lambda - 1);
      if (lambda < 1 + 1e-9)
        fail(ErrorCode::Internal, "outward walk stalled");
    }
  }
}

RationalUnivariate run_push(const Route& route, bool to_infinity, cplx c,
                            double R, double eps, const RungeLimits& lim,
                            std::optional<cplx> target) {
  PushState st;
  st.p = route.front().first;
  st.s = route.front().second;
  st.a = {cplx{-1.0 / st.s, 0}};  // 1/(zeta - z) = -(1/s) * (s/(z-zeta))
  double budget = eps;
  for (size_t t = 1; t < route.size(); ++t) {
    budget *= 0.5;  // per-step allowance eps * 2^{-step-1}
    if (!to_infinity) {
      // terminal jump: once the target sees the pole inside its own
      // clearance disc, one expansion finishes the walk.  Descending hops
      // would pile up (s/s')^m factors instead, so jump as early as the
      // dry run below confirms every live order lands under the cap.
      auto [pf, sf] = route.back();
      double rho = std::abs(st.p - pf) / sf;
      if (st.p != pf && rho <= kJumpRatio) {
        int live = 0;
        for (const cplx& am : st.a)
          if (am != cplx{}) ++live;
        double fac = 1;
        bool fits = live > 0;
        for (size_t m = 1; m <= st.a.size() && fits; ++m) {
          fac *= st.s / sf;
          if (st.a[m - 1] == cplx{}) continue;
          double lead = std::abs(st.a[m - 1]) * fac;
          if (expand_reach(lead, static_cast<int>(m), rho,
                           0.5 * budget / live,
                           lim.degree_cap) > lim.degree_cap)
            fits = false;
        }
        if (fits) {
          hop_core(st, pf, sf, budget, lim.degree_cap);
          break;
        }
      }
    }
    hop(st, route[t].first, route[t].second, budget, lim.degree_cap);
  }
  RationalUnivariate out;
  out.var = 0;
  if (to_infinity) {
    budget *= 0.5;
    out.center = c;
    out.radius = R;
    out.poly = convert_to_polynomial(st, c, R, budget, lim.degree_cap);
  } else {
    PrincipalPart part;
    part.pole = *target;
    part.scale = st.s;
    part.coeffs = std::move(st.a);
    out.parts.push_back(std::move(part));
  }
  out.trim();
  return out;
}

// Fallback when stepwise relocation of some kernel in a component cannot
// stay under the degree cap (deep holes or distant poles force tangential
// or descending hops whose re-expansions blow up).  The component's summed
// kernel  A(z) = sum_k coef_k / (zeta_k - z)  is still tame on the set: the
// node spacing is far below the node-to-set distance, so A is exponentially
// close to the smooth partial Cauchy integral it discretizes.  Fit A in the
// target basis by least squares over the certification samples and accept
// only if the measured residual fits the pooled budget of the component.
RationalUnivariate fit_group_aggregate(const std::vector<cplx>& zetas,
                                       const std::vector<cplx>& coefs,
                                       const PlanarCompact& K,
                                       const SamplePlan& plan,
                                       std::optional<cplx> target, double budget,
                                       const RungeLimits& lim) {
  const std::vector<cplx>& S = plan.all;
  if (S.empty())
    fail(ErrorCode::Internal, "no certification samples to fit against");
  std::vector<cplx> A(S.size());
  for (size_t i = 0; i < S.size(); ++i) {
    cplx acc = 0;
    for (size_t k = 0; k < zetas.size(); ++k) acc += coefs[k] / (zetas[k] - S[i]);
    A[i] = acc;
  }
  RationalLsFitter fitter(K, target, S, lim);
  return fitter.fit(A, budget);
}

}  // namespace

RationalUnivariate push_pole_along(cplx zeta, const PlanarCompact& K,
                                   const ReachTree& tree,
                                   std::optional<cplx> target, double eps,
                                   const RungeLimits& lim) {
  if (!(eps > 0))
    fail(ErrorCode::PreconditionViolated, "push budget must be positive");
  double s0 = K.distance(zeta);
  if (!(s0 > 0))
    fail(ErrorCode::PreconditionViolated, "pole push must start outside the set");
  cplx c = K.basis_center();
  double R = K.basis_radius();

  if (!target.has_value()) {
    Route route;
    double rdir = R / std::abs(zeta - c);
    if (rdir < 1 && geom_terms(1.0 / std::abs(zeta - c), rdir, 0.5 * eps) <=
                        lim.degree_cap) {
      route.emplace_back(zeta, s0);  // plain geometric Taylor series fits
    } else {
      auto [ci, cj] = K.mask().locate(zeta);
      if (K.mask().in_range(ci, cj)) {
        route = plan_route(tree.waypoints_from(zeta), K);
      } else {
        route.emplace_back(zeta, s0);  // off-grid start in the outer region
      }
      extend_outward(route, K, c, R);
    }
    return run_push(route, true, c, R, eps, lim, target);
  }

  if (zeta == *target) {  // nothing to relocate
    RationalUnivariate out;
    out.var = 0;
    out.parts.push_back({zeta, s0, {cplx{-1.0 / s0, 0}}});
    return out;
  }
  double sf = K.distance(*target);
  double rho = sf > 0 ? std::abs(zeta - *target) / sf
                      : std::numeric_limits<double>::infinity();
  if (rho < 1) {
    // the target already sees zeta inside its own clearance disc: relocate
    // in one exact geometric expansion, no intermediate poles
    int n = geom_terms(1.0 / sf, rho, 0.5 * eps);
    if (n <= lim.degree_cap) {
      RationalUnivariate out;
      out.var = 0;
      PrincipalPart part;
      part.pole = *target;
      part.scale = sf;
      part.coeffs.resize(n);
      cplx x = (zeta - *target) / sf;
      cplx cur{-1.0 / sf, 0};
      for (int k = 0; k < n; ++k) {
        part.coeffs[k] = cur;
        cur *= x;
      }
      out.parts.push_back(std::move(part));
      out.trim();
      return out;
    }
  }
  Route route = plan_route(tree.waypoints_from(zeta), K);
  return run_push(route, false, c, R, eps, lim, target);
}

RationalUnivariate push_pole(cplx zeta, const PlanarCompact& K,
                             std::optional<cplx> target, double eps,
                             const RungeLimits& lim) {
  ComplementComponents comps = complement_components(K);
  int comp = comps.label_at(zeta);
  if (comp < 0)
    fail(ErrorCode::PreconditionViolated,
         "pole push must start outside the set");
  if (target.has_value()) {
    if (comps.label_at(*target) != comp)
      fail(ErrorCode::PathNotFound,
           "start and target lie in different complement components");
  } else if (comp != comps.unbounded) {
    fail(ErrorCode::PathNotFound,
         "start is enclosed by the set; infinity is unreachable");
  }
  ReachTree tree = ReachTree::build(K, comps, comp, target);
  return push_pole_along(zeta, K, tree, target, eps, lim);
}

// ------------------------------------------------------ univariate pipeline

RationalUnivariate approximate_univariate(const OracleFn& g, const PlanarCompact& K,
                                          const PoleSet& L, double eps,
                                          double delta, UnivariateReport* rep,
                                          const RungeLimits& lim) {
  if (!(eps > 0))
    fail(ErrorCode::PreconditionViolated, "approximation budget must be positive");
  Cycle gamma = build_cycle(K, delta);
  CauchyQuadrature quad = cauchy_quadrature(g, K, gamma, 0.5 * eps, lim);
  ComplementComponents comps = complement_components(K);

  size_t active = 0;
  std::vector<cplx> prod(quad.nodes.size());
  for (size_t k = 0; k < quad.nodes.size(); ++k) {
    prod[k] = quad.nodes[k].weight * quad.gvals[k];
    if (prod[k] != cplx{0, 0}) ++active;
  }

  // group the active nodes by complement component (= by assigned pole)
  std::map<int, std::vector<size_t>> groups;
  for (size_t k = 0; k < quad.nodes.size(); ++k) {
    if (prod[k] == cplx{0, 0}) continue;
    cplx zeta = quad.nodes[k].zeta;
    int comp = comps.label_at(zeta);
    if (comp < 0) {
      // the node's own cell meets the set; inherit the label of the nearest
      // free neighbor cell (the node itself is >= one pitch away from K)
      auto [ci, cj] = comps.labels.locate(zeta);
      double bestd = std::numeric_limits<double>::infinity();
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          int ni = ci + di, nj = cj + dj;
          if (!comps.labels.in_range(ni, nj) || comps.labels.at(ni, nj) < 0)
            continue;
          double d = std::abs(comps.labels.cell_center(ni, nj) - zeta);
          if (d < bestd) {
            bestd = d;
            comp = comps.labels.at(ni, nj);
          }
        }
      if (comp < 0)
        fail(ErrorCode::Internal, "quadrature node has no free neighbor cell");
    }
    groups[comp].push_back(k);
  }

  SamplePlan plan = sample_points(K, 1);
  RationalUnivariate out;
  out.var = 0;
  for (const auto& [comp, members] : groups) {
    std::optional<cplx> target = L.poles.at(L.assignment.at(comp));
    ReachTree tree = ReachTree::build(K, comps, comp, target);
    RationalUnivariate acc;
    acc.var = 0;
    bool pushed = true;
    try {
      for (size_t k : members) {
        double ek =
            0.5 * eps / (static_cast<double>(active) * std::abs(prod[k]));
        RationalUnivariate rk =
            push_pole_along(quad.nodes[k].zeta, K, tree, target, ek, lim);
        rk.scale_by(prod[k]);
        acc.add_in(rk);
      }
    } catch (const RkError& e) {
      if (e.code() != ErrorCode::BudgetOverflow) throw;
      pushed = false;  // fall back to one fit for the whole component
    }
    if (!pushed) {
      std::vector<cplx> zetas, coefs;
      zetas.reserve(members.size());
      coefs.reserve(members.size());
      for (size_t k : members) {
        zetas.push_back(quad.nodes[k].zeta);
        coefs.push_back(prod[k]);
      }
      double gbudget =
          0.5 * eps * static_cast<double>(members.size()) / active;
      acc = fit_group_aggregate(zetas, coefs, K, plan, target, gbudget, lim);
    }
    out.add_in(acc);
  }
  out.trim();

  if (rep) {
    double worst = 0;
    cplx argmax = plan.all.empty() ? cplx{0, 0} : plan.all.front();
    for (cplx z : plan.all) {
      double e = std::abs(g.at1(z) - out.eval(z));
      if (e > worst) {
        worst = e;
        argmax = z;
      }
    }
    rep->quad_error = quad.sampled_error;
    rep->push_budget = 0.5 * eps;
    rep->sampled_error = worst;
    rep->argmax = argmax;
    rep->samples = plan.all.size();
    rep->nodes = static_cast<int>(quad.nodes.size());
    rep->quad_level = quad.level;
    rep->max_degree = std::max(out.poly_degree(), out.max_part_order());
  }
  return out;
}

// --------------------------------------------------- least-squares fitting

struct RationalLsFitter::Impl {
  cplx c;
  double R = 1;
  std::optional<cplx> target;
  double psc = 1;   // frame of the emitted principal part:
  cplx psh{0, 0};   // basis variable v = psc/(z - target) - psh
  int cap = 500;
  std::vector<cplx> S, W;    // samples and basis variable values there
  std::vector<size_t> rows;  // stride subsample the solve runs on
  // one factorization per basis size, built when a fit first needs it
  mutable std::map<int, Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>> qr;
};

RationalLsFitter::RationalLsFitter(const PlanarCompact& K,
                                   std::optional<cplx> target,
                                   std::vector<cplx> samples,
                                   const RungeLimits& lim)
    : impl_(std::make_unique<Impl>()) {
  if (samples.empty())
    fail(ErrorCode::Internal, "no certification samples to fit against");
  Impl& im = *impl_;
  im.c = K.basis_center();
  im.R = K.basis_radius();
  im.target = target;
  if (target && !(K.distance(*target) > 0))
    fail(ErrorCode::PoleInsideSet, "fit target touches the set");
  im.cap = lim.degree_cap;
  im.S = std::move(samples);
  im.W.resize(im.S.size());
  if (target) {
    // center and scale the Moebius image of the samples so the basis
    // variable fills a unit disc; plain powers of dist/(z-pole) become
    // numerically dependent long before the degree cap when the pole sits
    // far away and the image is a small off-center disc.
    std::vector<cplx> w0(im.S.size());
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (size_t i = 0; i < im.S.size(); ++i) {
      w0[i] = 1.0 / (im.S[i] - *target);
      xlo = std::min(xlo, w0[i].real());
      xhi = std::max(xhi, w0[i].real());
      ylo = std::min(ylo, w0[i].imag());
      yhi = std::max(yhi, w0[i].imag());
    }
    cplx m0{0.5 * (xlo + xhi), 0.5 * (ylo + yhi)};
    double r0 = 0;
    for (cplx w : w0) r0 = std::max(r0, std::abs(w - m0));
    r0 = std::max(r0, 1e-300);
    im.psc = 1.0 / r0;
    im.psh = m0 / r0;
    for (size_t i = 0; i < im.S.size(); ++i) im.W[i] = (w0[i] - m0) / r0;
  } else {
    for (size_t i = 0; i < im.S.size(); ++i)
      im.W[i] = (im.S[i] - im.c) / im.R;
  }
  size_t stride = std::max<size_t>(1, im.S.size() / 1500);
  for (size_t i = 0; i < im.S.size(); i += stride) im.rows.push_back(i);
}

RationalLsFitter::~RationalLsFitter() = default;
RationalLsFitter::RationalLsFitter(RationalLsFitter&&) noexcept = default;
RationalLsFitter& RationalLsFitter::operator=(RationalLsFitter&&) noexcept =
    default;

RationalUnivariate RationalLsFitter::fit(const std::vector<cplx>& values,
                                         double budget) const {
  const Impl& im = *impl_;
  if (values.size() != im.S.size())
    fail(ErrorCode::Internal, "fit values do not match the sample set");
  // escalating basis sizes; the last rung is the degree cap itself
  std::vector<int> rungs{8, 32, 128};
  std::erase_if(rungs, [&](int n) { return n >= im.cap; });
  rungs.push_back(im.cap);
  for (int N : rungs) {
    int cols = N + 1;  // constant plus N powers
    auto it = im.qr.find(cols);
    if (it == im.qr.end()) {
      Eigen::MatrixXcd M(im.rows.size(), cols);
      for (size_t q = 0; q < im.rows.size(); ++q) {
        cplx w = im.W[im.rows[q]];
        cplx p{1, 0};
        for (int t = 0; t < cols; ++t) {
          M(q, t) = p;
          p *= w;
        }
      }
      it = im.qr.emplace(cols, M.colPivHouseholderQr()).first;
    }
    Eigen::VectorXcd rhs(im.rows.size());
    for (size_t q = 0; q < im.rows.size(); ++q) rhs(q) = values[im.rows[q]];
    Eigen::VectorXcd beta = it->second.solve(rhs);
    double worst = 0;
    for (size_t i = 0; i < im.S.size() && worst <= budget; ++i) {
      cplx w = im.W[i];
      cplx p{1, 0};
      cplx acc = 0;
      for (int t = 0; t < cols; ++t) {
        acc += cplx(beta(t)) * p;
        p *= w;
      }
      worst = std::max(worst, std::abs(values[i] - acc));
    }
    if (worst <= budget) {
      RationalUnivariate out;
      out.var = 0;
      out.center = im.c;
      out.radius = im.R;
      if (im.target) {
        out.poly.assign(1, cplx(beta(0)));
        PrincipalPart part;
        part.pole = *im.target;
        part.scale = im.psc;
        part.shift = im.psh;
        part.coeffs.assign(beta.data() + 1, beta.data() + cols);
        out.parts.push_back(std::move(part));
      } else {
        out.poly.assign(beta.data(), beta.data() + cols);
      }
      out.trim();
      return out;
    }
  }
  fail(ErrorCode::BudgetOverflow,
       "least-squares pole fit needs degree beyond the cap of " +
           std::to_string(im.cap));
}

}  // namespace rungekit
