#include "rungekit/rexpr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rungekit/errors.hpp"

namespace rungekit {

using nlohmann::json;

namespace {

// compose polynomial given in basis u with u = alpha*w + beta, returning
// coefficients in basis w (Horner with one linear multiply per step)
std::vector<cplx> poly_affine(const std::vector<cplx>& p, cplx alpha, cplx beta) {
  std::vector<cplx> out;
  for (size_t t = p.size(); t-- > 0;) {
    // out := out * (alpha*w + beta) + p[t]
    std::vector<cplx> nxt(out.size() + 1, cplx{0, 0});
    for (size_t k = 0; k < out.size(); ++k) {
      nxt[k + 1] += out[k] * alpha;
      nxt[k] += out[k] * beta;
    }
    if (nxt.empty()) nxt.push_back(cplx{0, 0});
    nxt[0] += p[t];
    out = std::move(nxt);
  }
  return out;
}

std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<cplx> out(a.size() + b.size() - 1, cplx{0, 0});
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

void guard_finite(cplx v) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    fail(ErrorCode::BudgetOverflow,
         "pole layout makes the product expansion numerically meaningless");
}

// Affine relation between two frames at the same pole: with v = scale/(z-p) -
// shift in the target frame, the source variable is v_src = alpha*v + beta.
void frame_affine(const PrincipalPart& src, double scale, cplx shift,
                  cplx& alpha, cplx& beta) {
  alpha = cplx{src.scale / scale, 0};
  beta = alpha * shift - src.shift;
}

// log of the coefficient growth incurred by rewriting src in another frame;
// small when both frames keep their basis bounded on the same set
double rebase_lngrowth(const PrincipalPart& src, double scale, cplx shift) {
  cplx alpha, beta;
  frame_affine(src, scale, shift, alpha, beta);
  double g = std::abs(alpha) + std::abs(beta);
  return static_cast<double>(src.coeffs.size()) * std::log(std::max(g, 1.0));
}

// coefficients of src expressed in the frame (scale, shift): out[k] multiplies
// v^k, so out[0] is a plain constant that belongs to the polynomial side
std::vector<cplx> rebase_part(const PrincipalPart& src, double scale, cplx shift) {
  cplx alpha, beta;
  frame_affine(src, scale, shift, alpha, beta);
  std::vector<cplx> sc(src.coeffs.size() + 1, cplx{0, 0});
  for (size_t m = 0; m < src.coeffs.size(); ++m) sc[m + 1] = src.coeffs[m];
  std::vector<cplx> out = poly_affine(sc, alpha, beta);
  for (cplx v : out) guard_finite(v);
  return out;
}

}  // namespace

// ------------------------------------------------------------- univariate

cplx RationalUnivariate::eval(cplx z) const {
  cplx out = 0;
  if (!poly.empty()) {
    cplx u = (z - center) / radius;
    cplx acc = poly.back();
    for (size_t t = poly.size() - 1; t-- > 0;) acc = acc * u + poly[t];
    out += acc;
  }
  for (const auto& p : parts) {
    if (z == p.pole)
      fail(ErrorCode::PoleHit, "evaluation point hits pole (" +
                                   std::to_string(p.pole.real()) + "," +
                                   std::to_string(p.pole.imag()) + ")");
    cplx v = p.scale / (z - p.pole) - p.shift;
    cplx acc = 0;  // Horner in v over c_1 v + c_2 v^2 + ...
    for (size_t m = p.coeffs.size(); m-- > 0;) acc = (acc + p.coeffs[m]) * v;
    out += acc;
  }
  return out;
}

int RationalUnivariate::poly_degree() const {
  for (size_t t = poly.size(); t-- > 0;)
    if (poly[t] != cplx{0, 0}) return static_cast<int>(t);
  return -1;
}

int RationalUnivariate::max_part_order() const {
  int mx = 0;
  for (const auto& p : parts) mx = std::max(mx, static_cast<int>(p.coeffs.size()));
  return mx;
}

bool RationalUnivariate::is_constant() const {
  return parts.empty() && poly_degree() <= 0;
}

RationalUnivariate RationalUnivariate::derivative() const {
  RationalUnivariate d;
  d.var = var;
  d.center = center;
  d.radius = radius;
  if (poly.size() > 1) {
    d.poly.resize(poly.size() - 1);
    for (size_t t = 1; t < poly.size(); ++t)
      d.poly[t - 1] = poly[t] * static_cast<double>(t) / radius;
  }
  for (const auto& p : parts) {
    PrincipalPart dp;
    dp.pole = p.pole;
    dp.scale = p.scale;
    dp.shift = p.shift;
    dp.coeffs.assign(p.coeffs.size() + 1, cplx{0, 0});
    // (v^m)' = -(m/scale)*(v+shift)^2 * v^{m-1}; the v^0 piece of the m = 1
    // band is a constant and belongs to the polynomial side
    for (size_t m = 1; m <= p.coeffs.size(); ++m) {
      cplx a = -p.coeffs[m - 1] * static_cast<double>(m) / p.scale;
      dp.coeffs[m] += a;
      dp.coeffs[m - 1] += 2.0 * p.shift * a;
      cplx lo = p.shift * p.shift * a;
      if (m >= 2) {
        dp.coeffs[m - 2] += lo;
      } else if (lo != cplx{0, 0}) {
        if (d.poly.empty()) d.poly.assign(1, cplx{0, 0});
        d.poly[0] += lo;
      }
    }
    d.parts.push_back(std::move(dp));
  }
  d.trim();
  return d;
}

void RationalUnivariate::scale_by(cplx s) {
  for (auto& c : poly) c *= s;
  for (auto& p : parts)
    for (auto& c : p.coeffs) c *= s;
}

void RationalUnivariate::trim() {
  while (!poly.empty() && poly.back() == cplx{0, 0}) poly.pop_back();
  for (auto& p : parts)
    while (!p.coeffs.empty() && p.coeffs.back() == cplx{0, 0}) p.coeffs.pop_back();
  std::erase_if(parts, [](const PrincipalPart& p) { return p.coeffs.empty(); });
}

void RationalUnivariate::add_in(const RationalUnivariate& o) {
  if (o.var != var) fail(ErrorCode::Internal, "add_in across variables");
  if (!o.poly.empty()) {
    if (poly.empty()) {
      center = o.center;
      radius = o.radius;
      poly = o.poly;
    } else {
      if (center != o.center || radius != o.radius)
        fail(ErrorCode::Internal, "polynomial basis mismatch in add_in");
      if (o.poly.size() > poly.size()) poly.resize(o.poly.size(), cplx{0, 0});
      for (size_t t = 0; t < o.poly.size(); ++t) poly[t] += o.poly[t];
    }
  }
  auto spill_const = [this](cplx c) {
    if (c == cplx{0, 0}) return;
    if (poly.empty()) poly.assign(1, cplx{0, 0});
    poly[0] += c;
  };
  for (const auto& op : o.parts) {
    PrincipalPart* mine = nullptr;
    for (auto& p : parts)
      if (p.pole == op.pole) { mine = &p; break; }
    if (!mine) {
      parts.push_back(op);
      continue;
    }
    if (mine->scale != op.scale || mine->shift != op.shift) {
      // frames at the same pole differ: rewrite whichever side distorts less
      if (rebase_lngrowth(*mine, op.scale, op.shift) <
          rebase_lngrowth(op, mine->scale, mine->shift)) {
        std::vector<cplx> rb = rebase_part(*mine, op.scale, op.shift);
        mine->scale = op.scale;
        mine->shift = op.shift;
        mine->coeffs.assign(rb.begin() + 1, rb.end());
        spill_const(rb[0]);
      } else {
        std::vector<cplx> rb = rebase_part(op, mine->scale, mine->shift);
        spill_const(rb[0]);
        if (rb.size() - 1 > mine->coeffs.size())
          mine->coeffs.resize(rb.size() - 1, cplx{0, 0});
        for (size_t m = 1; m < rb.size(); ++m) mine->coeffs[m - 1] += rb[m];
        continue;
      }
    }
    if (op.coeffs.size() > mine->coeffs.size())
      mine->coeffs.resize(op.coeffs.size(), cplx{0, 0});
    for (size_t m = 0; m < op.coeffs.size(); ++m) mine->coeffs[m] += op.coeffs[m];
  }
}

RationalUnivariate RationalUnivariate::constant(int var, cplx value) {
  RationalUnivariate r;
  r.var = var;
  r.poly = {value};
  return r;
}

// --------------------------------------------------- univariate products

namespace {

struct PoleKey {
  double re, im;
  bool operator<(const PoleKey& o) const {
    return re < o.re || (re == o.re && im < o.im);
  }
};

struct Accum {
  cplx center;
  double radius;
  std::vector<cplx> poly;
  std::map<PoleKey, PrincipalPart> parts;

  void add_poly(const std::vector<cplx>& p) {
    if (p.size() > poly.size()) poly.resize(p.size(), cplx{0, 0});
    for (size_t t = 0; t < p.size(); ++t) poly[t] += p[t];
  }
  void add_const(cplx c) {
    if (c == cplx{0, 0}) return;
    if (poly.empty()) poly.assign(1, cplx{0, 0});
    poly[0] += c;
  }
  void add_part(cplx pole, double scale, cplx shift, size_t order, cplx c) {
    auto [it, fresh] = parts.try_emplace(PoleKey{pole.real(), pole.imag()});
    auto& pp = it->second;
    if (fresh) {
      pp.pole = pole;
      pp.scale = scale;
      pp.shift = shift;
    }
    if (scale == pp.scale && shift == pp.shift) {
      if (pp.coeffs.size() < order) pp.coeffs.resize(order, cplx{0, 0});
      pp.coeffs[order - 1] += c;
      return;
    }
    // rewrite the incoming power in the stored frame
    PrincipalPart one;
    one.pole = pole;
    one.scale = scale;
    one.shift = shift;
    one.coeffs.assign(order, cplx{0, 0});
    one.coeffs[order - 1] = c;
    std::vector<cplx> rb = rebase_part(one, pp.scale, pp.shift);
    add_const(rb[0]);
    if (pp.coeffs.size() < rb.size() - 1) pp.coeffs.resize(rb.size() - 1, cplx{0, 0});
    for (size_t m = 1; m < rb.size(); ++m) pp.coeffs[m - 1] += rb[m];
  }
};

}  // namespace

RationalUnivariate multiply_univariate(const RationalUnivariate& a,
                                       const RationalUnivariate& b) {
  if (a.var != b.var) fail(ErrorCode::Internal, "multiply_univariate across variables");
  Accum acc;
  acc.center = a.poly.empty() && !b.poly.empty() ? b.center : a.center;
  acc.radius = a.poly.empty() && !b.poly.empty() ? b.radius : a.radius;

  // poly x poly
  if (!a.poly.empty() && !b.poly.empty()) {
    std::vector<cplx> bp = b.poly;
    if (b.center != acc.center || b.radius != acc.radius)
      bp = poly_affine(bp, acc.radius / b.radius, (acc.center - b.center) / b.radius);
    std::vector<cplx> ap = a.poly;
    if (a.center != acc.center || a.radius != acc.radius)
      ap = poly_affine(ap, acc.radius / a.radius, (acc.center - a.center) / a.radius);
    acc.add_poly(poly_mul(ap, bp));
  }

  // poly x principal part (both orders)
  auto poly_times_part = [&acc](const std::vector<cplx>& poly, cplx c, double R,
                                const PrincipalPart& q0) {
    // a shifted part is flattened to plain powers of scale/(z-pole) plus a
    // constant first; the constant piece folds into a scaled copy of the poly
    PrincipalPart q = q0;
    if (q0.shift != cplx{0, 0}) {
      std::vector<cplx> rb = rebase_part(q0, q0.scale, cplx{0, 0});
      q.shift = cplx{0, 0};
      q.coeffs.assign(rb.begin() + 1, rb.end());
      if (rb[0] != cplx{0, 0}) {
        std::vector<cplx> pc = poly;
        for (cplx& v : pc) v *= rb[0];
        if (c != acc.center || R != acc.radius)
          pc = poly_affine(pc, acc.radius / R, (acc.center - c) / R);
        for (cplx v : pc) guard_finite(v);
        acc.add_poly(pc);
      }
    }
    // rewrite the polynomial in w = (z - pole)/scale, multiply by
    // sum_m q_m w^{-m}, then split by sign of the exponent
    std::vector<cplx> pw = poly_affine(poly, q.scale / R, (q.pole - c) / R);
    for (cplx v : pw) guard_finite(v);
    std::vector<cplx> poly_in_w;  // exponent >= 0 pieces
    for (size_t t = 0; t < pw.size(); ++t) {
      for (size_t m = 1; m <= q.coeffs.size(); ++m) {
        cplx v = pw[t] * q.coeffs[m - 1];
        long e = static_cast<long>(t) - static_cast<long>(m);
        if (e >= 0) {
          if (poly_in_w.size() <= static_cast<size_t>(e))
            poly_in_w.resize(e + 1, cplx{0, 0});
          poly_in_w[e] += v;
        } else {
          acc.add_part(q.pole, q.scale, cplx{0, 0}, static_cast<size_t>(-e), v);
        }
      }
    }
    if (!poly_in_w.empty()) {
      // back to the accumulator basis: w = ((z-c)/R)*(R/scale) + (c-pole)/scale
      auto back = poly_affine(poly_in_w, acc.radius / q.scale,
                              (acc.center - q.pole) / q.scale);
      for (cplx v : back) guard_finite(v);
      acc.add_poly(back);
    }
  };
  if (!a.poly.empty())
    for (const auto& q : b.parts) poly_times_part(a.poly, a.center, a.radius, q);
  if (!b.poly.empty())
    for (const auto& q : a.parts) poly_times_part(b.poly, b.center, b.radius, q);

  // principal x principal
  for (const auto& p : a.parts) {
    for (const auto& q : b.parts) {
      if (p.pole == q.pole) {
        // same pole: bring q into p's frame, then convolve powers of v
        std::vector<cplx> qc;
        if (q.scale == p.scale && q.shift == p.shift) {
          qc.assign(q.coeffs.size() + 1, cplx{0, 0});
          for (size_t n = 0; n < q.coeffs.size(); ++n) qc[n + 1] = q.coeffs[n];
        } else {
          qc = rebase_part(q, p.scale, p.shift);
        }
        for (size_t m = 1; m <= p.coeffs.size(); ++m)
          for (size_t n = 0; n < qc.size(); ++n) {
            cplx v = p.coeffs[m - 1] * qc[n];
            if (v == cplx{0, 0}) continue;
            guard_finite(v);
            acc.add_part(p.pole, p.scale, p.shift, m + n, v);
          }
        continue;
      }
      // distinct poles: classical partial fractions over plain powers, so
      // shifted frames are flattened first and their constants spread over
      // the other factor afterwards
      PrincipalPart ps = p;
      cplx pc0{0, 0};
      if (p.shift != cplx{0, 0}) {
        std::vector<cplx> rb = rebase_part(p, p.scale, cplx{0, 0});
        pc0 = rb[0];
        ps.shift = cplx{0, 0};
        ps.coeffs.assign(rb.begin() + 1, rb.end());
      }
      PrincipalPart qs = q;
      cplx qc0{0, 0};
      if (q.shift != cplx{0, 0}) {
        std::vector<cplx> rb = rebase_part(q, q.scale, cplx{0, 0});
        qc0 = rb[0];
        qs.shift = cplx{0, 0};
        qs.coeffs.assign(rb.begin() + 1, rb.end());
      }
      if (pc0 != cplx{0, 0})  // pc0 * q in q's own frame
        for (size_t n = 1; n <= q.coeffs.size(); ++n)
          acc.add_part(q.pole, q.scale, q.shift, n, pc0 * q.coeffs[n - 1]);
      if (qc0 != cplx{0, 0})  // qc0 * flattened p; pc0*qc0 rode along above
        for (size_t m = 1; m <= ps.coeffs.size(); ++m)
          acc.add_part(p.pole, p.scale, cplx{0, 0}, m, qc0 * ps.coeffs[m - 1]);
      size_t M = ps.coeffs.size(), N = qs.coeffs.size();
      cplx d = p.pole - q.pole;  // a - b
      for (size_t m = 1; m <= M; ++m) {
        if (ps.coeffs[m - 1] == cplx{0, 0}) continue;
        for (size_t n = 1; n <= N; ++n) {
          if (qs.coeffs[n - 1] == cplx{0, 0}) continue;
          cplx w = ps.coeffs[m - 1] * qs.coeffs[n - 1] *
                   std::pow(p.scale, static_cast<double>(m)) *
                   std::pow(q.scale, static_cast<double>(n));
          // 1/((z-a)^m (z-b)^n) = sum_i A_i/(z-a)^i + sum_j B_j/(z-b)^j
          // A_i = (-1)^(m-i) C(n+m-i-1, m-i) (a-b)^-(n+m-i), B_j symmetric.
          double binom = 1.0;  // C(n-1+k, k) built incrementally over k = m-i
          cplx dpow = std::pow(d, -static_cast<double>(n));  // (a-b)^-(n + k), k=0
          for (size_t i = m; i >= 1; --i) {
            size_t k = m - i;
            if (k > 0) {
              binom *= static_cast<double>(n - 1 + k) / static_cast<double>(k);
              dpow /= d;
            }
            double sign = (k % 2 == 0) ? 1.0 : -1.0;
            cplx v = w * sign * binom * dpow / std::pow(p.scale, static_cast<double>(i));
            guard_finite(v);
            acc.add_part(p.pole, p.scale, cplx{0, 0}, i, v);
          }
          binom = 1.0;
          dpow = std::pow(-d, -static_cast<double>(m));
          for (size_t j = n; j >= 1; --j) {
            size_t k = n - j;
            if (k > 0) {
              binom *= static_cast<double>(m - 1 + k) / static_cast<double>(k);
              dpow /= -d;
            }
            double sign = (k % 2 == 0) ? 1.0 : -1.0;
            cplx v = w * sign * binom * dpow / std::pow(q.scale, static_cast<double>(j));
            guard_finite(v);
            acc.add_part(q.pole, q.scale, cplx{0, 0}, j, v);
          }
        }
      }
    }
  }

  RationalUnivariate out;
  out.var = a.var;
  out.center = acc.center;
  out.radius = acc.radius;
  out.poly = std::move(acc.poly);
  for (auto& [k, pp] : acc.parts) out.parts.push_back(std::move(pp));
  out.trim();
  return out;
}

// ----------------------------------------------------------------- tensor

cplx TensorRationalExpr::eval(std::span<const cplx> z) const {
  if (static_cast<int>(z.size()) != dim)
    fail(ErrorCode::DimensionMismatch, "evaluation point has wrong dimension");
  cplx out = 0;
  for (const auto& t : terms) {
    cplx v = t.scalar;
    for (const auto& f : t.factors) v *= f.eval(z[f.var]);
    out += v;
  }
  return out;
}

TensorRationalExpr TensorRationalExpr::plus(const TensorRationalExpr& o) const {
  if (o.dim != dim) fail(ErrorCode::DimensionMismatch, "sum across dimensions");
  TensorRationalExpr out = *this;
  out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
  return out;
}

TensorRationalExpr TensorRationalExpr::scaled(cplx s) const {
  TensorRationalExpr out = *this;
  for (auto& t : out.terms) t.scalar *= s;
  return out;
}

TensorRationalExpr TensorRationalExpr::product(const TensorRationalExpr& o) const {
  if (o.dim != dim) fail(ErrorCode::DimensionMismatch, "product across dimensions");
  TensorRationalExpr out;
  out.dim = dim;
  out.terms.reserve(terms.size() * o.terms.size());
  for (const auto& ta : terms) {
    for (const auto& tb : o.terms) {
      Term t;
      t.scalar = ta.scalar * tb.scalar;
      t.factors = ta.factors;
      for (const auto& f : tb.factors) {
        for (const auto& g : ta.factors)
          if (g.var == f.var)
            fail(ErrorCode::VariableCollisionInProduct,
                 "both operands depend on z" + std::to_string(f.var + 1));
        t.factors.push_back(f);
      }
      std::sort(t.factors.begin(), t.factors.end(),
                [](const auto& x, const auto& y) { return x.var < y.var; });
      out.terms.push_back(std::move(t));
    }
  }
  return out;
}

TensorRationalExpr TensorRationalExpr::constant(int dim, cplx value) {
  TensorRationalExpr e;
  e.dim = dim;
  e.terms.push_back(Term{value, {}});
  return e;
}

TensorRationalExpr TensorRationalExpr::from_univariate(int dim, RationalUnivariate f) {
  TensorRationalExpr e;
  e.dim = dim;
  Term t;
  t.scalar = cplx{1, 0};
  t.factors.push_back(std::move(f));
  e.terms.push_back(std::move(t));
  return e;
}

std::vector<VarPoles> poles_of(const TensorRationalExpr& e) {
  std::vector<VarPoles> out(e.dim);
  for (const auto& t : e.terms) {
    for (const auto& f : t.factors) {
      VarPoles& vp = out.at(f.var);
      if (f.poly_degree() >= 1) vp.infinity = true;
      for (const auto& p : f.parts) {
        bool has = std::any_of(vp.finite.begin(), vp.finite.end(),
                               [&](cplx q) { return q == p.pole; });
        bool live = std::any_of(p.coeffs.begin(), p.coeffs.end(),
                                [](cplx c) { return c != cplx{0, 0}; });
        if (!has && live) vp.finite.push_back(p.pole);
      }
    }
  }
  return out;
}

// ------------------------------------------------------------------- JSON

namespace {

json cplx_json(cplx v) { return json::array({v.real(), v.imag()}); }
cplx cplx_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json univariate_json(const RationalUnivariate& f) {
  json jf;
  jf["var"] = f.var;
  jf["center"] = cplx_json(f.center);
  jf["radius"] = f.radius;
  json poly = json::array();
  for (cplx c : f.poly) poly.push_back(cplx_json(c));
  jf["poly"] = poly;
  json parts = json::array();
  for (const auto& p : f.parts) {
    json jp;
    jp["pole"] = cplx_json(p.pole);
    jp["scale"] = p.scale;
    jp["shift"] = cplx_json(p.shift);
    json cs = json::array();
    for (cplx c : p.coeffs) cs.push_back(cplx_json(c));
    jp["coeffs"] = cs;
    parts.push_back(jp);
  }
  jf["parts"] = parts;
  return jf;
}

RationalUnivariate univariate_from(const json& jf) {
  RationalUnivariate f;
  f.var = jf.at("var").get<int>();
  f.center = cplx_from(jf.at("center"));
  f.radius = jf.at("radius").get<double>();
  for (const auto& c : jf.at("poly")) f.poly.push_back(cplx_from(c));
  for (const auto& jp : jf.at("parts")) {
    PrincipalPart p;
    p.pole = cplx_from(jp.at("pole"));
    p.scale = jp.at("scale").get<double>();
    if (jp.contains("shift")) p.shift = cplx_from(jp.at("shift"));
    for (const auto& c : jp.at("coeffs")) p.coeffs.push_back(cplx_from(c));
    f.parts.push_back(std::move(p));
  }
  return f;
}

}  // namespace

std::string expr_to_json(const TensorRationalExpr& e, bool pretty) {
  json je;
  je["dim"] = e.dim;
  json terms = json::array();
  for (const auto& t : e.terms) {
    json jt;
    jt["scalar"] = cplx_json(t.scalar);
    json fs = json::array();
    for (const auto& f : t.factors) fs.push_back(univariate_json(f));
    jt["factors"] = fs;
    terms.push_back(jt);
  }
  je["terms"] = terms;
  return pretty ? je.dump(2) : je.dump();
}

TensorRationalExpr expr_from_json(const std::string& text) {
  json je;
  try {
    je = json::parse(text);
  } catch (const json::exception& ex) {
    fail(ErrorCode::SyntaxError, std::string("expression JSON: ") + ex.what());
  }
  try {
    TensorRationalExpr e;
    e.dim = je.at("dim").get<int>();
    for (const auto& jt : je.at("terms")) {
      TensorRationalExpr::Term t;
      t.scalar = cplx_from(jt.at("scalar"));
      for (const auto& jf : jt.at("factors")) t.factors.push_back(univariate_from(jf));
      e.terms.push_back(std::move(t));
    }
    return e;
  } catch (const json::exception& ex) {
    fail(ErrorCode::SyntaxError, std::string("expression JSON: ") + ex.what());
  }
}

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::string cnum(cplx v) {
  if (v.imag() == 0) return num(v.real());
  std::ostringstream os;
  os << "(" << num(v.real()) << (v.imag() < 0 ? "-" : "+") << num(std::abs(v.imag()))
     << "i)";
  return os.str();
}

}  // namespace

std::string expr_pretty(const TensorRationalExpr& e) {
  std::ostringstream os;
  os << "sum of " << e.terms.size() << " term(s) in " << e.dim << " variable(s)\n";
  size_t shown = 0;
  for (const auto& t : e.terms) {
    if (++shown > 40) {
      os << "  ... (" << e.terms.size() - 40 << " more terms)\n";
      break;
    }
    os << "  " << cnum(t.scalar);
    for (const auto& f : t.factors) {
      os << " * [z" << f.var + 1 << ":";
      if (f.poly_degree() >= 0) {
        os << " poly deg " << f.poly_degree() << " in (z" << f.var + 1 << "-"
           << cnum(f.center) << ")/" << num(f.radius);
      }
      for (const auto& p : f.parts)
        os << " pole " << cnum(p.pole) << " order " << p.coeffs.size();
      os << "]";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace rungekit
