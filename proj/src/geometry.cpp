#include "rungekit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>

namespace rungekit {

namespace {
constexpr double kInf = 1e30;
}

// ------------------------------------------------------------------ EDT

static void dt1d(std::vector<double>& f, std::vector<double>& d,
                 std::vector<int>& v, std::vector<double>& z, int n) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = 0;
    while (true) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

std::vector<double> distance_transform(const std::vector<double>& seed, int nx, int ny) {
  std::vector<double> work(seed);
  int n = std::max(nx, ny);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  // columns
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) f[j] = work[static_cast<size_t>(j) * nx + i];
    dt1d(f, d, v, z, ny);
    for (int j = 0; j < ny; ++j) work[static_cast<size_t>(j) * nx + i] = d[j];
  }
  // rows
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) f[i] = work[static_cast<size_t>(j) * nx + i];
    dt1d(f, d, v, z, nx);
    for (int i = 0; i < nx; ++i) work[static_cast<size_t>(j) * nx + i] = d[i];
  }
  for (double& x : work) x = std::sqrt(x);
  return work;
}

// ------------------------------------------------------------- rasterize

PlanarCompact PlanarCompact::rasterize(const ShapeSet& set, double pitch,
                                       double pad,
                                       const std::vector<cplx>& extra_cover) {
  if (set.empty()) fail(ErrorCode::BadScene, "compact has no shapes");
  if (!(pitch > 0)) fail(ErrorCode::BadScene, "grid pitch must be positive");
  Box b = set.bbox();
  for (cplx p : extra_cover) b.include(p);
  double margin = std::max(pad, 2.5 * pitch);
  b.expand(margin);
  int nx = std::max(4, static_cast<int>(std::ceil(b.width() / pitch)) + 1);
  int ny = std::max(4, static_cast<int>(std::ceil(b.height() / pitch)) + 1);
  if (static_cast<long long>(nx) * ny > 40'000'000)
    fail(ErrorCode::BadScene, "grid would exceed 4e7 cells; coarsen the pitch");

  PlanarCompact K;
  K.set_ = set;
  K.bbox_ = Box{b.x0, b.y0, b.x0 + nx * pitch, b.y0 + ny * pitch};
  K.mask_ = BitGrid(b.x0, b.y0, pitch, nx, ny, 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      cplx c0 = K.mask_.corner(i, j);
      Box cell{c0.real(), c0.imag(), c0.real() + pitch, c0.imag() + pitch};
      if (set.cell_meets(cell, pitch)) {
        K.mask_.at(i, j) = 1;
        ++K.cells_;
      }
    }
  }
  if (K.cells_ == 0)
    fail(ErrorCode::BadScene, "set rasterized to an empty mask; refine the pitch");

  std::vector<double> seed_mask(K.mask_.size()), seed_comp(K.mask_.size());
  for (size_t t = 0; t < K.mask_.size(); ++t) {
    bool m = K.mask_.data()[t] != 0;
    seed_mask[t] = m ? 0.0 : kInf;
    seed_comp[t] = m ? kInf : 0.0;
  }
  auto dm = distance_transform(seed_mask, nx, ny);
  auto dc = distance_transform(seed_comp, nx, ny);
  K.dist_mask_ = Grid<double>(b.x0, b.y0, pitch, nx, ny);
  K.depth_ = Grid<double>(b.x0, b.y0, pitch, nx, ny);
  for (size_t t = 0; t < dm.size(); ++t) {
    K.dist_mask_.data()[t] = dm[t] * pitch;
    K.depth_.data()[t] = dc[t] * pitch;
  }
  return K;
}

// ------------------------------------------------------------ components

ComplementComponents complement_components(const PlanarCompact& K) {
  const BitGrid& m = K.mask();
  ComplementComponents out;
  out.labels = LabelGrid(m.x0(), m.y0(), m.pitch(), m.nx(), m.ny(), -2);
  for (int j = 0; j < m.ny(); ++j)
    for (int i = 0; i < m.nx(); ++i)
      if (m.at(i, j)) out.labels.at(i, j) = -1;

  auto flood = [&](int si, int sj, int label) {
    std::deque<std::pair<int, int>> q{{si, sj}};
    out.labels.at(si, sj) = label;
    int count = 1;
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    while (!q.empty()) {
      auto [i, j] = q.front();
      q.pop_front();
      for (int k = 0; k < 4; ++k) {
        int ni = i + dx[k], nj = j + dy[k];
        if (!out.labels.in_range(ni, nj) || out.labels.at(ni, nj) != -2) continue;
        out.labels.at(ni, nj) = label;
        ++count;
        q.emplace_back(ni, nj);
      }
    }
    return count;
  };

  for (int j = 0; j < m.ny(); ++j)
    for (int i = 0; i < m.nx(); ++i)
      if (out.labels.at(i, j) == -2)
        out.cell_counts.push_back(flood(i, j, out.count++));
  out.unbounded = out.labels.at(0, 0);  // padding guarantees a free border ring
  return out;
}

int ComplementComponents::label_at(cplx p) const {
  auto [i, j] = labels.locate(p);
  if (!labels.in_range(i, j)) return unbounded;
  return labels.at(i, j);
}

// -------------------------------------------------------------- pole sets

PoleSet validate_pole_set(const PlanarCompact& K, const ComplementComponents& comps,
                          const std::vector<std::optional<cplx>>& poles) {
  PoleSet ps;
  ps.poles = poles;
  ps.assignment.assign(comps.count, -1);
  for (size_t idx = 0; idx < poles.size(); ++idx) {
    if (!poles[idx].has_value()) {
      if (ps.assignment[comps.unbounded] < 0)
        ps.assignment[comps.unbounded] = static_cast<int>(idx);
      continue;
    }
    cplx p = *poles[idx];
    if (K.set().contains(p))
      fail(ErrorCode::PoleInsideSet,
           "pole (" + std::to_string(p.real()) + "," + std::to_string(p.imag()) +
               ") lies on the compact");
    if (K.distance(p) < 1.5 * K.pitch())
      fail(ErrorCode::PoleInsideSet,
           "pole (" + std::to_string(p.real()) + "," + std::to_string(p.imag()) +
               ") is closer to the set than 1.5 grid cells; refine the pitch");
    int lbl = comps.label_at(p);
    if (lbl < 0)
      fail(ErrorCode::PoleInsideSet, "pole falls in a masked cell; refine the pitch");
    if (ps.assignment[lbl] < 0) ps.assignment[lbl] = static_cast<int>(idx);
  }
  for (int c = 0; c < comps.count; ++c) {
    if (ps.assignment[c] < 0) {
      // report a representative location to make the failure actionable
      cplx rep;
      double best = -1;
      for (int j = 0; j < comps.labels.ny(); ++j)
        for (int i = 0; i < comps.labels.nx(); ++i)
          if (comps.labels.at(i, j) == c && K.mask_distance().at(i, j) > best) {
            best = K.mask_distance().at(i, j);
            rep = comps.labels.cell_center(i, j);
          }
      fail(ErrorCode::MissingPoleInComponent,
           "complement component " + std::to_string(c) + " near (" +
               std::to_string(rep.real()) + "," + std::to_string(rep.imag()) +
               ") contains no pole" + (c == comps.unbounded ? " (unbounded)" : ""));
    }
  }
  return ps;
}

// ------------------------------------------------------------------ cycles

cplx Cycle::Loop::at(double s) const {
  s = std::fmod(s, length);
  if (s < 0) s += length;
  auto it = std::upper_bound(cumlen.begin(), cumlen.end(), s);
  size_t k = (it == cumlen.begin()) ? 0 : (it - cumlen.begin() - 1);
  size_t n = pts.size();
  cplx a = pts[k % n], b = pts[(k + 1) % n];
  double seg = std::abs(b - a);
  double t = seg > 0 ? (s - cumlen[k]) / seg : 0.0;
  return a + t * (b - a);
}

double Cycle::total_length() const {
  double L = 0;
  for (const auto& l : loops) L += l.length;
  return L;
}

namespace {

struct DirEdge {
  int from, to;  // corner indices
  bool used = false;
};

void finish_loop(Cycle::Loop& loop) {
  loop.cumlen.assign(loop.pts.size(), 0.0);
  double L = 0;
  for (size_t k = 0; k < loop.pts.size(); ++k) {
    loop.cumlen[k] = L;
    L += std::abs(loop.pts[(k + 1) % loop.pts.size()] - loop.pts[k]);
  }
  loop.length = L;
}

}  // namespace

Cycle build_cycle(const PlanarCompact& K, double delta) {
  const BitGrid& m = K.mask();
  double h = K.pitch();
  int nx = m.nx(), ny = m.ny();
  BitGrid fat(m.x0(), m.y0(), h, nx, ny, 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (K.mask_distance().at(i, j) <= delta * (1 + 1e-12)) fat.at(i, j) = 1;
  for (int i = 0; i < nx; ++i)
    if (fat.at(i, 0) || fat.at(i, ny - 1))
      fail(ErrorCode::DilationOverflow, "delta too large for the grid padding");
  for (int j = 0; j < ny; ++j)
    if (fat.at(0, j) || fat.at(nx - 1, j))
      fail(ErrorCode::DilationOverflow, "delta too large for the grid padding");

  // Directed boundary edges between corner points, region kept on the left.
  int cw = nx + 1;  // corners per row
  auto cidx = [cw](int i, int j) { return j * cw + i; };
  std::map<int, std::vector<DirEdge>> edges_from;
  auto add_edge = [&](int fi, int fj, int ti, int tj) {
    edges_from[cidx(fi, fj)].push_back({cidx(fi, fj), cidx(ti, tj)});
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!fat.at(i, j)) continue;
      if (j == 0 || !fat.at(i, j - 1)) add_edge(i, j, i + 1, j);          // bottom, +x
      if (j == ny - 1 || !fat.at(i, j + 1)) add_edge(i + 1, j + 1, i, j + 1);  // top, -x
      if (i == 0 || !fat.at(i - 1, j)) add_edge(i, j + 1, i, j);          // left, -y
      if (i == nx - 1 || !fat.at(i + 1, j)) add_edge(i + 1, j, i + 1, j + 1);  // right, +y
    }
  }

  auto corner_pt = [&](int c) {
    return cplx{m.x0() + (c % cw) * h, m.y0() + (c / cw) * h};
  };

  Cycle cyc;
  cyc.delta = delta;
  for (auto& [start, outs] : edges_from) {
    for (auto& e0 : outs) {
      if (e0.used) continue;
      std::vector<int> corners;
      DirEdge* e = &e0;
      while (!e->used) {
        e->used = true;
        corners.push_back(e->from);
        auto it = edges_from.find(e->to);
        if (it == edges_from.end())
          fail(ErrorCode::Internal, "boundary trace broke off");
        auto& nexts = it->second;
        DirEdge* pick = nullptr;
        if (nexts.size() == 1) {
          pick = &nexts[0];
        } else {
          // pinch corner: prefer the left turn so each region stays simple
          int din = e->to - e->from;  // +-1 or +-cw in corner index space
          cplx dir_in = (std::abs(din) == 1) ? cplx(din, 0) : cplx(0, din / cw);
          cplx left = dir_in * cplx(0, 1);
          for (auto& cand : nexts) {
            if (cand.used) continue;
            int dout = cand.to - cand.from;
            cplx dir_out = (std::abs(dout) == 1) ? cplx(dout, 0) : cplx(0, dout / cw);
            if (std::abs(dir_out - left) < 0.5) { pick = &cand; break; }
            if (!pick) pick = &cand;
          }
        }
        if (!pick) break;
        e = pick;
      }
      Cycle::Loop loop;
      loop.pts.reserve(corners.size());
      for (int c : corners) loop.pts.push_back(corner_pt(c));

      // two passes of circular moving average soften the staircase so that
      // arclength-equidistant quadrature nodes see a nearly smooth curve
      if (loop.pts.size() >= 12) {
        for (int pass = 0; pass < 2; ++pass) {
          std::vector<cplx> sm(loop.pts.size());
          size_t n = loop.pts.size();
          for (size_t k = 0; k < n; ++k) {
            cplx acc = 0;
            for (int o = -2; o <= 2; ++o) acc += loop.pts[(k + n + o) % n];
            sm[k] = acc / 5.0;
          }
          loop.pts = std::move(sm);
        }
      }
      finish_loop(loop);
      if (loop.length > 0) cyc.loops.push_back(std::move(loop));
    }
  }
  if (cyc.loops.empty()) fail(ErrorCode::Internal, "no boundary loops traced");

  // certified clearance: vertices and chord midpoints against exact shapes
  double clear = std::numeric_limits<double>::infinity();
  for (const auto& loop : cyc.loops) {
    size_t n = loop.pts.size();
    for (size_t k = 0; k < n; ++k) {
      clear = std::min(clear, K.distance(loop.pts[k]));
      clear = std::min(clear, K.distance(0.5 * (loop.pts[k] + loop.pts[(k + 1) % n])));
    }
  }
  cyc.clearance = clear;
  if (clear < delta / 2)
    fail(ErrorCode::CycleTooCloseToSet,
         "cycle clearance " + std::to_string(clear) + " fell below delta/2; "
         "use a finer pitch or a larger delta");

  // winding certificate over a subsample of mask cells
  int step = std::max(1, static_cast<int>(std::sqrt(K.cell_count() / 400.0)));
  for (int j = 0; j < ny; j += step) {
    for (int i = 0; i < nx; i += step) {
      if (!m.at(i, j)) continue;
      if (winding_number(cyc, m.cell_center(i, j)) != 1)
        fail(ErrorCode::WindingCheckFailed,
             "cycle winding != 1 at a sample of the compact");
    }
  }
  return cyc;
}

int winding_number(const Cycle& c, cplx p) {
  double scale = 1.0 + std::abs(p);
  double total = 0;
  for (const auto& loop : c.loops) {
    size_t n = loop.pts.size();
    double ang = 0;
    for (size_t k = 0; k < n; ++k) {
      cplx a = loop.pts[k] - p, b = loop.pts[(k + 1) % n] - p;
      if (segment_distance(p, loop.pts[k], loop.pts[(k + 1) % n]) < 1e-9 * scale)
        fail(ErrorCode::PointOnCycle, "winding number query lies on the cycle");
      ang += std::atan2(a.real() * b.imag() - a.imag() * b.real(),
                        a.real() * b.real() + a.imag() * b.imag());
    }
    total += ang;
  }
  double w = total / (2 * M_PI);
  double r = std::round(w);
  if (std::abs(w - r) > 0.25)
    fail(ErrorCode::WindingCheckFailed, "winding number failed to converge to an integer");
  return static_cast<int>(r);
}

// ----------------------------------------------------------------- samples

SamplePlan sample_points(const PlanarCompact& K, int refine) {
  const BitGrid& m = K.mask();
  double h = K.pitch();
  SamplePlan plan;
  int nb = 1 << refine;          // boundary subdivisions per cell side
  int ni = 1 << (refine - 1);    // interior subdivisions
  // Solid sets keep only points that genuinely belong to the set, so every
  // sup estimated over the plan is a sup over the set itself (error budgets
  // assume |basis| <= 1 there, which fails for stray points outside).  Curve
  // and point sets have measure-zero membership, so for those the whole cell
  // spread stands in for the nearby curve.
  bool spread = K.set().degenerate();
  for (int j = 0; j < m.ny(); ++j) {
    for (int i = 0; i < m.nx(); ++i) {
      if (!m.at(i, j)) continue;
      bool edge = i == 0 || j == 0 || i == m.nx() - 1 || j == m.ny() - 1 ||
                  !m.at(i - 1, j) || !m.at(i + 1, j) || !m.at(i, j - 1) ||
                  !m.at(i, j + 1);
      cplx c0 = m.corner(i, j);
      int k = edge ? nb : ni;
      auto& dst = edge ? plan.boundary : plan.interior;
      size_t before = dst.size();
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
          cplx p = c0 + cplx((a + 0.5) * h / k, (b + 0.5) * h / k);
          if (spread || K.set().contains(p)) dst.push_back(p);
        }
      if (dst.size() == before) {
        // sliver cell: none of the lattice points landed inside; fall back
        // to the cell center when that at least is a member
        cplx mid = c0 + cplx(0.5 * h, 0.5 * h);
        if (K.set().contains(mid)) dst.push_back(mid);
      }
    }
  }
  plan.all = plan.boundary;
  plan.all.insert(plan.all.end(), plan.interior.begin(), plan.interior.end());
  return plan;
}

// --------------------------------------------------------------- reach tree

ReachTree ReachTree::build(const PlanarCompact& K, const ComplementComponents& comps,
                           int component, std::optional<cplx> target) {
  ReachTree t;
  t.K_ = &K;
  t.target_ = target;
  t.component_ = component;
  const LabelGrid& lab = comps.labels;
  int nx = lab.nx(), ny = lab.ny();
  double h = K.pitch();
  t.parent_ = Grid<int32_t>(lab.x0(), lab.y0(), h, nx, ny, -2);

  auto admissible = [&](int i, int j) {
    if (lab.at(i, j) != component) return false;
    return K.distance(lab.cell_center(i, j)) >= 2.2 * h;
  };

  std::deque<std::pair<int, int>> q;
  if (target.has_value()) {
    if (comps.label_at(*target) != component)
      fail(ErrorCode::PathNotFound, "target pole is not in the required component");
    auto [ti, tj] = lab.locate(*target);
    if (!lab.in_range(ti, tj))
      fail(ErrorCode::PathNotFound, "target pole lies outside the grid");
    t.parent_.at(ti, tj) = -1;
    q.emplace_back(ti, tj);
  } else {
    if (component != comps.unbounded)
      fail(ErrorCode::PathNotFound,
           "pole at infinity serves only the unbounded component");
    for (int i = 0; i < nx; ++i)
      for (int j : {0, ny - 1})
        if (admissible(i, j) && t.parent_.at(i, j) == -2) {
          t.parent_.at(i, j) = -1;
          q.emplace_back(i, j);
        }
    for (int j = 0; j < ny; ++j)
      for (int i : {0, nx - 1})
        if (admissible(i, j) && t.parent_.at(i, j) == -2) {
          t.parent_.at(i, j) = -1;
          q.emplace_back(i, j);
        }
    if (q.empty()) fail(ErrorCode::PathNotFound, "grid border is not reachable");
  }

  while (!q.empty()) {
    auto [i, j] = q.front();
    q.pop_front();
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        int ni_ = i + di, nj = j + dj;
        if (!lab.in_range(ni_, nj) || t.parent_.at(ni_, nj) != -2) continue;
        if (!admissible(ni_, nj)) continue;
        t.parent_.at(ni_, nj) = static_cast<int32_t>(lab.idx(i, j));
        q.emplace_back(ni_, nj);
      }
  }
  return t;
}

std::vector<cplx> ReachTree::waypoints_from(cplx start) const {
  const Grid<int32_t>& par = parent_;
  auto [i, j] = par.locate(start);
  if (!par.in_range(i, j) || par.at(i, j) == -2) {
    bool found = false;
    for (int dj = -1; dj <= 1 && !found; ++dj)
      for (int di = -1; di <= 1 && !found; ++di)
        if (par.in_range(i + di, j + dj) && par.at(i + di, j + dj) != -2) {
          i += di;
          j += dj;
          found = true;
        }
    if (!found)
      fail(ErrorCode::PathNotFound,
           "no admissible route from (" + std::to_string(start.real()) + "," +
               std::to_string(start.imag()) + "); refine the pitch");
  }
  std::vector<cplx> wp{start};
  int32_t cur = static_cast<int32_t>(par.idx(i, j));
  while (cur >= 0) {
    int ci = cur % par.nx(), cj = cur / par.nx();
    cplx c = par.cell_center(ci, cj);
    if (std::abs(c - wp.back()) > 1e-12) wp.push_back(c);
    cur = par.at(ci, cj);
  }
  if (target_.has_value() && std::abs(*target_ - wp.back()) > 1e-12)
    wp.push_back(*target_);
  return wp;
}

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::None: return "None";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadScene: return "BadScene";
    case ErrorCode::DilationOverflow: return "DilationOverflow";
    case ErrorCode::WindingCheckFailed: return "WindingCheckFailed";
    case ErrorCode::PointOnCycle: return "PointOnCycle";
    case ErrorCode::MissingPoleInComponent: return "MissingPoleInComponent";
    case ErrorCode::PoleInsideSet: return "PoleInsideSet";
    case ErrorCode::PathNotFound: return "PathNotFound";
    case ErrorCode::CycleTooCloseToSet: return "CycleTooCloseToSet";
    case ErrorCode::PointNotInBoundedComponent: return "PointNotInBoundedComponent";
    case ErrorCode::EvalSingularity: return "EvalSingularity";
    case ErrorCode::PoleHit: return "PoleHit";
    case ErrorCode::VariableCollisionInProduct: return "VariableCollisionInProduct";
    case ErrorCode::RefinementLimitExceeded: return "RefinementLimitExceeded";
    case ErrorCode::BudgetOverflow: return "BudgetOverflow";
    case ErrorCode::TermBlowup: return "TermBlowup";
    case ErrorCode::MarginTooSmall: return "MarginTooSmall";
    case ErrorCode::PatchTooSmall: return "PatchTooSmall";
    case ErrorCode::PullbackNotHolomorphic: return "PullbackNotHolomorphic";
    case ErrorCode::NonHolomorphicOracle: return "NonHolomorphicOracle";
    case ErrorCode::NotDisjoint: return "NotDisjoint";
    case ErrorCode::TransitivityViolated: return "TransitivityViolated";
    case ErrorCode::SeparationTooTight: return "SeparationTooTight";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace rungekit
