#include "rungekit/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>

#include "rungekit/errors.hpp"

namespace rungekit {
namespace {

// Hard ceiling on the number of coordinates so slice shims can use stack
// buffers; every realistic scene is far below it.
constexpr int kMaxDim = 12;

// Slice functions take their arguments in processing order (the coordinate
// about to be integrated out sits last); a FactorRef remembers which global
// variable each slot is.
struct FactorRef {
  const ProductFactor* fac = nullptr;
  int var = 0;
};

using SliceFn = std::function<cplx(std::span<const cplx>)>;

// Sum of coefficient magnitudes: a sup bound for the function on its home
// compact, since every basis function (scaled monomial or scaled reciprocal
// power) has magnitude at most one there.
double coeff_sum(const RationalUnivariate& r) {
  double s = 0;
  for (cplx c : r.poly) s += std::abs(c);
  for (const auto& p : r.parts)
    for (cplx c : p.coeffs) s += std::abs(c);
  return s;
}

double term_bound(const TensorRationalExpr::Term& t) {
  double b = std::abs(t.scalar);
  for (const auto& f : t.factors) b *= coeff_sum(f);
  return b;
}

// Per-factor point lists whose product approximates the requested tuple
// count; stride subsampling keeps boundary and interior mixed.
std::vector<std::vector<cplx>> sample_axes(const std::vector<FactorRef>& facs,
                                           size_t target) {
  size_t d = facs.size();
  auto per = static_cast<size_t>(
      std::ceil(std::pow(static_cast<double>(target), 1.0 / static_cast<double>(d))));
  per = std::max<size_t>(per, 2);
  std::vector<std::vector<cplx>> axes(d);
  for (size_t i = 0; i < d; ++i) {
    SamplePlan plan = sample_points(facs[i].fac->K, 1);
    size_t stride = std::max<size_t>(1, plan.all.size() / per);
    for (size_t j = 0; j < plan.all.size(); j += stride)
      axes[i].push_back(plan.all[j]);
  }
  return axes;
}

// A few frozen tuples of the not-yet-processed coordinates; the Riemann sum
// in the active coordinate is certified against the oracle on each of them.
// Three "aligned" slices plus one mixed slice catch a quadrature that only
// works for special sections.
std::vector<std::vector<cplx>> probe_slices(const std::vector<FactorRef>& rest) {
  std::vector<std::array<cplx, 3>> reps(rest.size());
  for (size_t i = 0; i < rest.size(); ++i) {
    SamplePlan plan = sample_points(rest[i].fac->K, 1);
    const auto& a = plan.all;
    reps[i] = {a.front(), a[a.size() / 2], a.back()};
  }
  std::vector<std::vector<cplx>> probes;
  for (int t = 0; t < 4; ++t) {
    std::vector<cplx> tup(rest.size());
    for (size_t i = 0; i < rest.size(); ++i)
      tup[i] = reps[i][t < 3 ? t : (i % 3)];
    probes.push_back(std::move(tup));
  }
  return probes;
}

struct SliceQuad {
  CauchyQuadrature q;
  std::vector<std::vector<cplx>> fvals;  // [probe][node] oracle values
  double err = 0;                        // worst certified gap over the probes
};

// Doubles the node count until the discrete Cauchy integral in the active
// coordinate reproduces the oracle on every probe slice, certified over the
// standard sample of the active factor.
SliceQuad slice_quadrature(const SliceFn& f,
                           const std::vector<std::vector<cplx>>& probes,
                           const PlanarCompact& K, const SamplePlan& plan,
                           const Cycle& gamma, double eps_half,
                           const RungeLimits& lim) {
  size_t nrest = probes.front().size();
  std::array<cplx, kMaxDim> buf;
  // oracle values on the probe slices at the certification samples do not
  // depend on the refinement level; evaluate them once up front
  std::vector<std::vector<cplx>> gref(probes.size());
  for (size_t p = 0; p < probes.size(); ++p) {
    std::copy(probes[p].begin(), probes[p].end(), buf.begin());
    gref[p].resize(plan.all.size());
    for (size_t i = 0; i < plan.all.size(); ++i) {
      buf[nrest] = plan.all[i];
      gref[p][i] = f(std::span<const cplx>(buf.data(), nrest + 1));
    }
  }
  for (int level = std::clamp(lim.start_quad_level, 0, lim.max_quad_level);
       level <= lim.max_quad_level; ++level) {
    CauchyQuadrature q = quadrature_at_level(gamma, level, lim.base_nodes);
    if (q.nodes.size() > lim.max_quad_nodes) break;
    for (const auto& n : q.nodes)
      if (K.distance(n.zeta) < K.pitch())
        fail(ErrorCode::CycleTooCloseToSet,
             "quadrature node within one pitch of the set");
    size_t M = q.nodes.size();
    std::vector<double> zr(M), zi(M), pr(M), pi(M);
    for (size_t k = 0; k < M; ++k) {
      zr[k] = q.nodes[k].zeta.real();
      zi[k] = q.nodes[k].zeta.imag();
    }
    std::vector<std::vector<cplx>> fv(probes.size());
    double worst = 0;
    for (size_t p = 0; p < probes.size() && worst <= eps_half; ++p) {
      std::copy(probes[p].begin(), probes[p].end(), buf.begin());
      fv[p].resize(M);
      for (size_t k = 0; k < M; ++k) {
        buf[nrest] = q.nodes[k].zeta;
        fv[p][k] = f(std::span<const cplx>(buf.data(), nrest + 1));
        cplx w = q.nodes[k].weight * fv[p][k];
        pr[k] = w.real();
        pi[k] = w.imag();
      }
      for (size_t i = 0; i < plan.all.size(); ++i) {
        double xr = plan.all[i].real(), xi = plan.all[i].imag();
        double ar = 0, ai = 0;
        for (size_t k = 0; k < M; ++k) {
          double dr = zr[k] - xr, di = zi[k] - xi;
          double inv = 1.0 / (dr * dr + di * di);
          ar += (pr[k] * dr + pi[k] * di) * inv;
          ai += (pi[k] * dr - pr[k] * di) * inv;
        }
        double er = gref[p][i].real() - ar, ei = gref[p][i].imag() - ai;
        worst = std::max(worst, std::sqrt(er * er + ei * ei));
      }
    }
    if (worst <= eps_half) {
      SliceQuad out;
      out.q = std::move(q);
      out.fvals = std::move(fv);
      out.err = worst;
      return out;
    }
  }
  fail(ErrorCode::RefinementLimitExceeded,
       "Riemann sum would not certify on the probe slices within the node limits");
}

struct RecOut {
  TensorRationalExpr expr;
  std::vector<LevelLedger> levels;
};

RecOut recurse(const SliceFn& f, double margin, const std::vector<FactorRef>& facs,
               int gdim, double eps, const TensorLimits& lim) {
  // Base case: hand the slice to the univariate pipeline unchanged.
  if (facs.size() == 1) {
    const ProductFactor& pf = *facs[0].fac;
    PoleSet L1 = pf.L;
    if (L1.assignment.empty())
      L1 = validate_pole_set(pf.K, complement_components(pf.K), L1.poles);
    OracleFn g;
    g.dim = 1;
    g.margin = margin;
    g.f = f;
    UnivariateReport urep;
    RationalUnivariate r =
        approximate_univariate(g, pf.K, L1, eps, pf.delta, &urep, lim.runge);
    r.var = facs[0].var;
    RecOut out;
    out.expr = TensorRationalExpr::from_univariate(gdim, std::move(r));
    LevelLedger led;
    led.var = facs[0].var;
    led.quad_error = urep.quad_error;
    led.push_budget = urep.push_budget;
    led.nodes = urep.nodes;
    led.quad_level = urep.quad_level;
    out.levels.push_back(led);
    return out;
  }

  const FactorRef cur = facs.back();
  std::vector<FactorRef> rest(facs.begin(), facs.end() - 1);
  const PlanarCompact& K = cur.fac->K;

  ComplementComponents comps = complement_components(K);
  PoleSet L = cur.fac->L;
  if (static_cast<int>(L.assignment.size()) != comps.count)
    L = validate_pole_set(K, comps, L.poles);

  Cycle gamma = build_cycle(K, cur.fac->delta);
  SamplePlan plan = sample_points(K, 1);
  std::vector<std::vector<cplx>> probes = probe_slices(rest);

  // Budget split: half for the Riemann sum, a quarter for pole relocation,
  // just under a quarter for the recursive slices, the shaving for pruning.
  double eps_push = 0.25 * eps;
  double eps_rec = 0.249 * eps;
  double reserve = 0.001 * eps;

  SliceQuad sq = slice_quadrature(f, probes, K, plan, gamma, 0.5 * eps, lim.runge);
  const auto& nodes = sq.q.nodes;
  size_t M = nodes.size();

  // Slice magnitude per node as seen on the probes, floored so a slice that
  // happens to vanish on every probe still gets a finite relocation budget.
  std::vector<double> mag(M, 0);
  double magmax = 0;
  for (const auto& fv : sq.fvals)
    for (size_t k = 0; k < M; ++k) {
      mag[k] = std::max(mag[k], std::abs(fv[k]));
      magmax = std::max(magmax, mag[k]);
    }
  for (double& m : mag) m = std::max(m, 0.01 * magmax + 1e-300);

  // Cycle nodes land in complement cells almost always; when one straddles a
  // mask cell, borrow the label of the nearest free neighbour.
  auto label_near = [&](cplx p) {
    int lab = comps.label_at(p);
    double h = K.pitch();
    for (int ring = 1; ring <= 3 && lab < 0; ++ring)
      for (int a = -ring; a <= ring && lab < 0; ++a)
        for (int b = -ring; b <= ring && lab < 0; ++b) {
          if (std::max(std::abs(a), std::abs(b)) != ring) continue;
          lab = comps.label_at(p + cplx(a * h, b * h));
        }
    return lab < 0 ? comps.unbounded : lab;
  };
  std::map<int, ReachTree> trees;
  std::map<int, RationalLsFitter> fitters;

  TensorRationalExpr out;
  out.dim = gdim;
  std::vector<LevelLedger> sub;
  double push_claim = 0, rec_claim = 0;
  size_t nrest = rest.size();
  // Children integrate over the same contour as their siblings, so seed each
  // one's refinement search just below the level its predecessor settled on.
  TensorLimits clim = lim;
  clim.runge.start_quad_level = 0;

  for (size_t k = 0; k < M; ++k) {
    cplx c_k = nodes[k].weight;
    int lab = label_near(nodes[k].zeta);
    std::optional<cplx> target = L.poles[L.assignment[lab]];
    auto it = trees.find(lab);
    if (it == trees.end())
      it = trees.emplace(lab, ReachTree::build(K, comps, lab, target)).first;

    double push_tol = eps_push / (static_cast<double>(M) * std::abs(c_k) * mag[k]);
    RationalUnivariate rk;
    try {
      rk = push_pole_along(nodes[k].zeta, K, it->second, target, push_tol,
                           lim.runge);
    } catch (const RkError& e) {
      if (e.code() != ErrorCode::BudgetOverflow) throw;
      // The walked expansion ran out of degree; project the kernel onto the
      // target basis directly instead.  One factorization per component
      // serves every node labelled into it.
      auto ft = fitters.find(lab);
      if (ft == fitters.end())
        ft = fitters
                 .emplace(lab, RationalLsFitter(K, target, plan.all, lim.runge))
                 .first;
      std::vector<cplx> vals(plan.all.size());
      for (size_t i = 0; i < vals.size(); ++i)
        vals[i] = 1.0 / (nodes[k].zeta - plan.all[i]);
      rk = ft->second.fit(vals, push_tol);
    }
    rk.var = cur.var;
    push_claim += std::abs(c_k) * mag[k] * push_tol;

    // Bound the slice multiplier by its measured sup on the samples rather
    // than its coefficient mass: a walked conversion can carry large
    // alternating coefficients whose sum wildly overstates the actual size.
    double bound_k = 0;
    for (cplx z : plan.all) bound_k = std::max(bound_k, std::abs(rk.eval(z)));
    bound_k = std::max(bound_k, 1e-12);
    double rec_tol =
        eps_rec / (static_cast<double>(M) * std::abs(c_k) * bound_k);
    SliceFn fk = [&f, zk = nodes[k].zeta, nrest](std::span<const cplx> w) {
      std::array<cplx, kMaxDim> buf;
      std::copy(w.begin(), w.end(), buf.begin());
      buf[nrest] = zk;
      return f(std::span<const cplx>(buf.data(), nrest + 1));
    };
    RecOut child = recurse(fk, margin, rest, gdim, rec_tol, clim);
    if (!child.levels.empty())
      clim.runge.start_quad_level = std::max(0, child.levels[0].quad_level - 1);
    double lift = std::abs(c_k) * bound_k;
    rec_claim += lift * rec_tol;
    if (sub.size() < child.levels.size()) sub.resize(child.levels.size());
    for (size_t l = 0; l < child.levels.size(); ++l) {
      sub[l].var = child.levels[l].var;
      sub[l].quad_error += lift * child.levels[l].quad_error;
      sub[l].push_budget += lift * child.levels[l].push_budget;
      sub[l].rec_budget += lift * child.levels[l].rec_budget;
      sub[l].dropped += lift * child.levels[l].dropped;
      sub[l].nodes += child.levels[l].nodes;
      sub[l].quad_level = std::max(sub[l].quad_level, child.levels[l].quad_level);
    }

    TensorRationalExpr term =
        child.expr.product(TensorRationalExpr::from_univariate(gdim, std::move(rk)))
            .scaled(c_k);
    if (out.terms.size() + term.terms.size() > lim.max_terms)
      fail(ErrorCode::TermBlowup, "assembled terms would exceed the cap of " +
                                      std::to_string(lim.max_terms));
    out.terms.insert(out.terms.end(),
                     std::make_move_iterator(term.terms.begin()),
                     std::make_move_iterator(term.terms.end()));
  }

  // Term pruning: drop terms whose coefficient-sum bound is individually
  // negligible, as long as everything dropped stays within the reserve.
  double tau = reserve / static_cast<double>(std::max<size_t>(out.terms.size(), 1));
  double dropped = 0;
  std::vector<TensorRationalExpr::Term> kept;
  kept.reserve(out.terms.size());
  for (auto& t : out.terms) {
    double b = term_bound(t);
    if (b <= tau && dropped + b <= reserve)
      dropped += b;
    else
      kept.push_back(std::move(t));
  }
  out.terms = std::move(kept);

  LevelLedger led;
  led.var = cur.var;
  led.quad_error = sq.err;
  led.push_budget = push_claim;
  led.rec_budget = rec_claim;
  led.dropped = dropped;
  led.nodes = static_cast<int>(M);
  led.quad_level = sq.q.level;

  RecOut ret;
  ret.expr = std::move(out);
  ret.levels.push_back(led);
  ret.levels.insert(ret.levels.end(), sub.begin(), sub.end());
  return ret;
}

std::vector<int> resolve_perm(const TensorLimits& lim, int d) {
  std::vector<int> perm = lim.perm;
  if (perm.empty()) {
    perm.resize(d);
    for (int i = 0; i < d; ++i) perm[i] = d - 1 - i;
  }
  if (static_cast<int>(perm.size()) != d)
    fail(ErrorCode::PreconditionViolated, "processing order has wrong length");
  std::vector<char> seen(d, 0);
  for (int v : perm) {
    if (v < 0 || v >= d || seen[v])
      fail(ErrorCode::PreconditionViolated, "processing order is not a permutation");
    seen[v] = 1;
  }
  return perm;
}

void fill_report(ApproxReport* rep, double eps, const RecOut& ro, double worst,
                 std::vector<cplx> arg, size_t count, size_t terms) {
  if (!rep) return;
  rep->eps = eps;
  rep->sampled_error = worst;
  rep->argmax = std::move(arg);
  rep->samples = count;
  rep->terms = terms;
  rep->levels = ro.levels;
  rep->dropped_total = 0;
  for (const auto& l : ro.levels) rep->dropped_total += l.dropped;
  rep->ledger_total = 0;
  if (!ro.levels.empty()) {
    const LevelLedger& l0 = ro.levels.front();
    rep->ledger_total = l0.quad_error + l0.push_budget + l0.rec_budget + l0.dropped;
  }
}

}  // namespace

TensorRationalExpr approximate_product(const OracleFn& f, const ProductDomain& dom,
                                       double eps, ApproxReport* rep,
                                       const TensorLimits& lim) {
  int d = dom.dim();
  if (d < 1 || d > kMaxDim)
    fail(ErrorCode::PreconditionViolated, "product domain needs 1.." +
                                              std::to_string(kMaxDim) + " factors");
  if (f.dim != d)
    fail(ErrorCode::DimensionMismatch, "oracle is " + std::to_string(f.dim) +
                                           "-variate on a " + std::to_string(d) +
                                           "-factor domain");
  if (!(eps > 0)) fail(ErrorCode::PreconditionViolated, "tolerance must be positive");

  std::vector<int> perm = resolve_perm(lim, d);
  // Processing-order view: the worker integrates out facs.back() first, so
  // facs holds the permutation reversed.
  std::vector<FactorRef> facs(d);
  for (int t = 0; t < d; ++t)
    facs[t] = {&dom.factors[perm[d - 1 - t]], perm[d - 1 - t]};

  SliceFn top = [&f, &facs, d](std::span<const cplx> w) {
    std::array<cplx, kMaxDim> buf;
    for (int t = 0; t < d; ++t) buf[facs[t].var] = w[t];
    return f(std::span<const cplx>(buf.data(), d));
  };

  // The report sample in variable order; also drives the constant shortcut.
  std::vector<FactorRef> byvar(d);
  for (int i = 0; i < d; ++i) byvar[i] = {&dom.factors[i], i};
  std::vector<std::vector<cplx>> axes = sample_axes(byvar, lim.report_samples);

  auto for_each_tuple = [&](auto&& visit) {
    std::vector<size_t> idx(d, 0);
    std::vector<cplx> tup(d);
    for (;;) {
      for (int i = 0; i < d; ++i) tup[i] = axes[i][idx[i]];
      visit(tup);
      int i = 0;
      while (i < d && ++idx[i] == axes[i].size()) idx[i++] = 0;
      if (i == d) break;
    }
  };

  // Constant oracles short-circuit the whole construction (d >= 2; the
  // univariate pipeline keeps its own behaviour for d = 1).  A coarse probe
  // nominates the value, then the full sample has to match it exactly.
  if (d >= 2) {
    bool flat = true;
    std::vector<cplx> ctup(d);
    for (int i = 0; i < d; ++i) ctup[i] = axes[i].front();
    cplx v0 = f(ctup);
    std::vector<size_t> cidx(d, 0);
    for (;;) {
      for (int i = 0; i < d; ++i) {
        const auto& ax = axes[i];
        size_t pick = cidx[i] == 0 ? 0 : (cidx[i] == 1 ? ax.size() / 2 : ax.size() - 1);
        ctup[i] = ax[pick];
      }
      if (f(ctup) != v0) {
        flat = false;
        break;
      }
      int i = 0;
      while (i < d && ++cidx[i] == 3) cidx[i++] = 0;
      if (i == d) break;
    }
    if (flat) {
      double worst = 0;
      std::vector<cplx> arg(d);
      size_t count = 0;
      for_each_tuple([&](const std::vector<cplx>& tup) {
        double gap = std::abs(f(tup) - v0);
        ++count;
        if (gap > worst) {
          worst = gap;
          arg = tup;
        }
      });
      if (worst == 0) {
        RecOut ro;
        ro.expr = TensorRationalExpr::constant(d, v0);
        fill_report(rep, eps, ro, 0, std::move(arg), count, ro.expr.terms.size());
        return ro.expr;
      }
    }
  }

  RecOut ro = recurse(top, f.margin, facs, d, eps, lim);

  double worst = 0;
  std::vector<cplx> arg(d);
  size_t count = 0;
  for_each_tuple([&](const std::vector<cplx>& tup) {
    double gap = std::abs(f(tup) - ro.expr.eval(tup));
    ++count;
    if (gap > worst) {
      worst = gap;
      arg = tup;
    }
  });
  fill_report(rep, eps, ro, worst, std::move(arg), count, ro.expr.terms.size());
  return ro.expr;
}

namespace {

// d/dz^alpha of the expression, factor by factor; a term with no factor in a
// differentiated variable is constant there, so it drops out.
TensorRationalExpr alpha_derivative(const TensorRationalExpr& e,
                                    const std::vector<int>& alpha) {
  TensorRationalExpr out;
  out.dim = e.dim;
  for (const auto& t : e.terms) {
    TensorRationalExpr::Term nt;
    nt.scalar = t.scalar;
    std::vector<char> used(alpha.size(), 0);
    for (const auto& fac : t.factors) {
      RationalUnivariate g = fac;
      for (int rep = 0; rep < alpha[fac.var]; ++rep) g = g.derivative();
      used[fac.var] = 1;
      nt.factors.push_back(std::move(g));
    }
    bool dead = false;
    for (size_t i = 0; i < alpha.size(); ++i)
      if (alpha[i] > 0 && !used[i]) dead = true;
    if (!dead) out.terms.push_back(std::move(nt));
  }
  return out;
}

// Iterated central differences: per coordinate with order a, the stencil
// sum_j (-1)^j C(a,j) f(x + (a/2 - j) h e_i) / h^a, composed across
// coordinates recursively.
cplx fd_derivative(const OracleFn& f, std::vector<cplx> x,
                   const std::vector<int>& alpha, size_t i, double h) {
  if (i == alpha.size()) return f(x);
  int a = alpha[i];
  if (a == 0) return fd_derivative(f, x, alpha, i + 1, h);
  double binom = 1;
  cplx sum = 0;
  for (int j = 0; j <= a; ++j) {
    std::vector<cplx> xj = x;
    xj[i] += (0.5 * a - j) * h;
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    sum += sign * binom * fd_derivative(f, std::move(xj), alpha, i + 1, h);
    binom = binom * (a - j) / (j + 1);
  }
  return sum / std::pow(h, a);
}

}  // namespace

TensorRationalExpr approximate_with_derivatives(
    const OracleFn& f, const ProductDomain& dom, double eps,
    const std::vector<int>& orders, ApproxReport* rep, const TensorLimits& lim) {
  int d = dom.dim();
  if (orders.empty())
    fail(ErrorCode::PreconditionViolated, "empty list of derivative orders");
  int maxo = 0;
  for (int a : orders) {
    if (a < 0) fail(ErrorCode::PreconditionViolated, "negative derivative order");
    maxo = std::max(maxo, a);
  }

  TensorRationalExpr expr;
  if (maxo == 0) {
    expr = approximate_product(f, dom, eps, rep, lim);
  } else {
    double rho = f.margin;
    if (!(rho > 0))
      fail(ErrorCode::MarginTooSmall, "oracle declares no holomorphy margin");
    double de = rho / 4;
    for (const auto& fac : dom.factors)
      if (fac.delta + de >= rho)
        fail(ErrorCode::MarginTooSmall,
             "cycle standoff leaves no room inside the margin after enlargement");

    // Cauchy estimates on the enlarged product control every derivative with
    // total order up to A, at the price of a budget shrunk by de^A / A!.
    int A = d * maxo;
    double ln_shrink = A * std::log(de) - std::lgamma(A + 1.0);
    double eps_in = eps * std::exp(ln_shrink);
    if (!(eps_in > 1e-14))
      fail(ErrorCode::MarginTooSmall,
           "margin too small for the requested derivative orders at this tolerance");

    ProductDomain big;
    for (const auto& fac : dom.factors) {
      double pitch = fac.K.pitch();
      std::vector<cplx> cover;
      for (const auto& p : fac.L.poles)
        if (p) cover.push_back(*p);
      ProductFactor nf;
      nf.K = PlanarCompact::rasterize(fac.K.set().with_offset(de), pitch,
                                      fac.delta + 3 * pitch, cover);
      ComplementComponents comps = complement_components(nf.K);
      try {
        nf.L = validate_pole_set(nf.K, comps, fac.L.poles);
      } catch (const RkError& e) {
        fail(ErrorCode::MarginTooSmall,
             std::string("pole set no longer valid on the enlarged factor: ") +
                 e.what());
      }
      nf.delta = fac.delta;
      big.factors.push_back(std::move(nf));
    }

    OracleFn fin = f;
    fin.margin = rho - de;
    expr = approximate_product(fin, big, eps_in, rep, lim);
    if (rep) rep->eps = eps;
  }

  // Spot-check every requested multi-index against finite differences of the
  // oracle on the original domain.
  std::vector<FactorRef> byvar(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) byvar[i] = {&dom.factors[i], i};
  std::vector<std::vector<cplx>> axes = sample_axes(byvar, 128);
  std::vector<std::vector<cplx>> tuples;
  {
    std::vector<size_t> idx(d, 0);
    for (;;) {
      std::vector<cplx> tup(d);
      for (int i = 0; i < d; ++i) tup[i] = axes[i][idx[i]];
      tuples.push_back(std::move(tup));
      int i = 0;
      while (i < d && ++idx[i] == axes[i].size()) idx[i++] = 0;
      if (i == d) break;
    }
  }

  std::vector<int> alpha(d, 0);
  std::vector<size_t> oidx(d, 0);
  for (;;) {
    int total = 0;
    for (int i = 0; i < d; ++i) {
      alpha[i] = orders[oidx[i]];
      total += alpha[i];
    }
    // step balancing stencil roundoff (eps_mach / h^total) against
    // truncation; a fixed small h drowns high orders in roundoff
    double h = std::max(1e-4, std::pow(2.2e-16, 1.0 / (total + 2)));
    TensorRationalExpr de_expr = alpha_derivative(expr, alpha);
    double worst = 0;
    for (const auto& tup : tuples) {
      cplx fd = fd_derivative(f, tup, alpha, 0, h);
      worst = std::max(worst, std::abs(de_expr.eval(tup) - fd));
    }
    if (rep) {
      rep->deriv_orders.push_back(alpha);
      rep->deriv_errors.push_back(worst);
    }
    int i = 0;
    while (i < d && ++oidx[i] == orders.size()) oidx[i++] = 0;
    if (i == d) break;
  }
  return expr;
}

RationalUnivariate approximate_on_graph(const OracleFn& f_graph,
                                        const OracleFn& omega,
                                        const ProductFactor& base, double eps,
                                        ApproxReport* rep, const TensorLimits& lim) {
  if (f_graph.dim != 2)
    fail(ErrorCode::DimensionMismatch, "graph oracle must be bivariate");
  if (omega.dim != 1)
    fail(ErrorCode::DimensionMismatch, "graph map must be univariate");
  const PlanarCompact& K = base.K;

  OracleFn pull;
  pull.dim = 1;
  pull.margin = std::min(f_graph.margin, omega.margin);
  pull.f = [&f_graph, &omega](std::span<const cplx> z) {
    std::array<cplx, 2> zw{z[0], omega.at1(z[0])};
    return f_graph(std::span<const cplx>(zw.data(), 2));
  };

  // Holomorphy pre-check of the pullback on the deepest interior patch: a
  // Cauchy-Riemann defect that does not vanish with the pitch means the
  // composed function is not analytic and no approximation certificate can
  // hold.
  double deepest = 0;
  cplx z0;
  const Grid<double>& dep = K.depth();
  for (int j = 0; j < dep.ny(); ++j)
    for (int i = 0; i < dep.nx(); ++i)
      if (K.masked(i, j) && dep.at(i, j) > deepest) {
        deepest = dep.at(i, j);
        z0 = dep.cell_center(i, j);
      }
  if (deepest < 3 * K.pitch())
    fail(ErrorCode::PatchTooSmall,
         "pullback check needs an interior patch a few cells deep");
  const int n = 9;
  double hp = std::min(0.45 * deepest / (n / 2), K.pitch());
  Grid<cplx> patch(z0.real() - (n / 2 + 0.5) * hp, z0.imag() - (n / 2 + 0.5) * hp,
                   hp, n, n, cplx{});
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      patch.at(i, j) = pull.at1(patch.cell_center(i, j));
  double defect = cr_residual(patch, hp);
  if (defect > 10 * hp)
    fail(ErrorCode::PullbackNotHolomorphic,
         "composed function fails the Cauchy-Riemann check on an interior patch");

  UnivariateReport urep;
  RationalUnivariate q =
      approximate_univariate(pull, K, base.L, eps, base.delta, &urep, lim.runge);
  if (rep) {
    rep->eps = eps;
    rep->sampled_error = urep.sampled_error;
    rep->argmax = {urep.argmax};
    rep->samples = urep.samples;
    rep->terms = 1;
    LevelLedger led;
    led.var = 0;
    led.quad_error = urep.quad_error;
    led.push_budget = urep.push_budget;
    led.nodes = urep.nodes;
    led.quad_level = urep.quad_level;
    rep->levels = {led};
    rep->ledger_total = led.quad_error + led.push_budget;
    rep->dropped_total = 0;
  }
  return q;
}

}  // namespace rungekit
