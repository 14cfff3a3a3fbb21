#include "rungekit/shapes.hpp"

#include <algorithm>
#include <cmath>

#include "rungekit/errors.hpp"

namespace rungekit {

namespace {

double box_distance(const Box& b, cplx p) {
  double dx = std::max({b.x0 - p.real(), 0.0, p.real() - b.x1});
  double dy = std::max({b.y0 - p.imag(), 0.0, p.imag() - b.y1});
  return std::hypot(dx, dy);
}

// farthest point of a box from p (attained at a corner)
double box_max_distance(const Box& b, cplx p) {
  double dx = std::max(std::abs(p.real() - b.x0), std::abs(p.real() - b.x1));
  double dy = std::max(std::abs(p.imag() - b.y0), std::abs(p.imag() - b.y1));
  return std::hypot(dx, dy);
}

bool boxes_overlap(const Box& a, const Box& b) {
  return a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1;
}

std::vector<cplx> box_corners(const Box& b) {
  return {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
}

double cross(cplx u, cplx v) {
  return u.real() * v.imag() - u.imag() * v.real();
}

bool segment_meets_box(cplx a, cplx b, const Box& box) {
  if (box.contains(a) || box.contains(b)) return true;
  auto c = box_corners(box);
  for (int k = 0; k < 4; ++k)
    if (segments_cross(a, b, c[k], c[(k + 1) % 4])) return true;
  return false;
}

}  // namespace

double segment_distance(cplx p, cplx a, cplx b) {
  cplx ab = b - a;
  double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  double t = std::clamp(((p - a).real() * ab.real() + (p - a).imag() * ab.imag()) / len2, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

bool segments_cross(cplx a, cplx b, cplx c, cplx d) {
  double d1 = cross(b - a, c - a);
  double d2 = cross(b - a, d - a);
  double d3 = cross(d - c, a - c);
  double d4 = cross(d - c, b - c);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return true;
  // collinear / endpoint touches
  auto on = [](cplx u, cplx v, cplx w) {  // w on segment uv (collinear already)
    return std::min(u.real(), v.real()) - 1e-300 <= w.real() &&
           w.real() <= std::max(u.real(), v.real()) + 1e-300 &&
           std::min(u.imag(), v.imag()) - 1e-300 <= w.imag() &&
           w.imag() <= std::max(u.imag(), v.imag()) + 1e-300;
  };
  if (d1 == 0 && on(a, b, c)) return true;
  if (d2 == 0 && on(a, b, d)) return true;
  if (d3 == 0 && on(c, d, a)) return true;
  if (d4 == 0 && on(c, d, b)) return true;
  return false;
}

bool point_in_polygon(const std::vector<cplx>& poly, cplx p) {
  // even-odd crossing rule; boundary points resolved by the distance check
  // callers pair this with.
  bool in = false;
  size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    double yi = poly[i].imag(), yj = poly[j].imag();
    if ((yi > p.imag()) != (yj > p.imag())) {
      double xint = poly[j].real() +
                    (p.imag() - yj) / (yi - yj) * (poly[i].real() - poly[j].real());
      if (p.real() < xint) in = !in;
    }
  }
  return in;
}

Box shape_bbox(const Shape& s) {
  return std::visit(
      [](const auto& sh) -> Box {
        using T = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<T, DiscShape>) {
          return {sh.c.real() - sh.r, sh.c.imag() - sh.r, sh.c.real() + sh.r,
                  sh.c.imag() + sh.r};
        } else if constexpr (std::is_same_v<T, RectShape>) {
          return sh.b;
        } else if constexpr (std::is_same_v<T, CircleShape>) {
          return {sh.c.real() - sh.r, sh.c.imag() - sh.r, sh.c.real() + sh.r,
                  sh.c.imag() + sh.r};
        } else if constexpr (std::is_same_v<T, AnnulusShape>) {
          return {sh.c.real() - sh.rout, sh.c.imag() - sh.rout,
                  sh.c.real() + sh.rout, sh.c.imag() + sh.rout};
        } else {
          const auto& pts = [](const auto& x) -> const std::vector<cplx>& {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, PolyShape>)
              return x.v;
            else
              return x.p;
          }(sh);
          Box b{pts[0].real(), pts[0].imag(), pts[0].real(), pts[0].imag()};
          for (cplx p : pts) b.include(p);
          return b;
        }
      },
      s);
}

double shape_distance(const Shape& s, cplx p) {
  return std::visit(
      [p](const auto& sh) -> double {
        using T = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<T, DiscShape>) {
          return std::max(0.0, std::abs(p - sh.c) - sh.r);
        } else if constexpr (std::is_same_v<T, RectShape>) {
          return box_distance(sh.b, p);
        } else if constexpr (std::is_same_v<T, CircleShape>) {
          return std::abs(std::abs(p - sh.c) - sh.r);
        } else if constexpr (std::is_same_v<T, AnnulusShape>) {
          double d = std::abs(p - sh.c);
          if (d < sh.rin) return sh.rin - d;
          if (d > sh.rout) return d - sh.rout;
          return 0.0;
        } else if constexpr (std::is_same_v<T, PolyShape>) {
          if (point_in_polygon(sh.v, p)) return 0.0;
          double best = std::numeric_limits<double>::infinity();
          size_t n = sh.v.size();
          for (size_t i = 0; i < n; ++i)
            best = std::min(best, segment_distance(p, sh.v[i], sh.v[(i + 1) % n]));
          return best;
        } else {  // PointsShape
          double best = std::numeric_limits<double>::infinity();
          for (cplx q : sh.p) best = std::min(best, std::abs(p - q));
          return best;
        }
      },
      s);
}

bool shape_meets_cell(const Shape& s, const Box& cell) {
  return std::visit(
      [&cell](const auto& sh) -> bool {
        using T = std::decay_t<decltype(sh)>;
        if constexpr (std::is_same_v<T, DiscShape>) {
          return box_distance(cell, sh.c) <= sh.r;
        } else if constexpr (std::is_same_v<T, RectShape>) {
          return boxes_overlap(sh.b, cell);
        } else if constexpr (std::is_same_v<T, CircleShape>) {
          return box_distance(cell, sh.c) <= sh.r &&
                 box_max_distance(cell, sh.c) >= sh.r;
        } else if constexpr (std::is_same_v<T, AnnulusShape>) {
          return box_distance(cell, sh.c) <= sh.rout &&
                 box_max_distance(cell, sh.c) >= sh.rin;
        } else if constexpr (std::is_same_v<T, PolyShape>) {
          for (cplx c : box_corners(cell))
            if (point_in_polygon(sh.v, c)) return true;
          for (cplx v : sh.v)
            if (cell.contains(v)) return true;
          size_t n = sh.v.size();
          for (size_t i = 0; i < n; ++i)
            if (segment_meets_box(sh.v[i], sh.v[(i + 1) % n], cell)) return true;
          return false;
        } else {  // PointsShape
          for (cplx q : sh.p)
            if (cell.contains(q)) return true;
          return false;
        }
      },
      s);
}

ShapeSet::ShapeSet(std::vector<Shape> shapes, std::vector<Shape> holes)
    : shapes_(std::move(shapes)), holes_(std::move(holes)) {
  for (const Shape& h : holes_) {
    if (!std::holds_alternative<DiscShape>(h) &&
        !std::holds_alternative<RectShape>(h) &&
        !std::holds_alternative<PolyShape>(h))
      fail(ErrorCode::BadScene, "holes must be solid shapes (disc/rect/poly)");
  }
}

ShapeSet ShapeSet::with_offset(double delta) const {
  ShapeSet out = *this;
  out.offset_ += delta;
  return out;
}

Box ShapeSet::bbox() const {
  Box b = shape_bbox(shapes_.at(0));
  for (size_t i = 1; i < shapes_.size(); ++i) b.include(shape_bbox(shapes_[i]));
  b.expand(offset_);
  return b;
}

namespace {

// open-set membership used for holes
bool hole_contains_open(const Shape& h, cplx p) {
  if (auto* d = std::get_if<DiscShape>(&h)) return std::abs(p - d->c) < d->r;
  if (auto* r = std::get_if<RectShape>(&h))
    return p.real() > r->b.x0 && p.real() < r->b.x1 && p.imag() > r->b.y0 &&
           p.imag() < r->b.y1;
  const auto& poly = std::get<PolyShape>(h);
  return point_in_polygon(poly.v, p) && shape_distance(h, p) == 0.0;
}

// distance from a point inside an open hole to the hole's boundary
double hole_depth(const Shape& h, cplx p) {
  if (auto* d = std::get_if<DiscShape>(&h)) return d->r - std::abs(p - d->c);
  if (auto* r = std::get_if<RectShape>(&h)) {
    double dx = std::min(p.real() - r->b.x0, r->b.x1 - p.real());
    double dy = std::min(p.imag() - r->b.y0, r->b.y1 - p.imag());
    return std::min(dx, dy);
  }
  const auto& poly = std::get<PolyShape>(h).v;
  double best = std::numeric_limits<double>::infinity();
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i)
    best = std::min(best, segment_distance(p, poly[i], poly[(i + 1) % n]));
  return best;
}

}  // namespace

double ShapeSet::base_distance(cplx p) const {
  for (const Shape& h : holes_)
    if (hole_contains_open(h, p)) return hole_depth(h, p);
  double best = std::numeric_limits<double>::infinity();
  for (const Shape& s : shapes_) {
    best = std::min(best, shape_distance(s, p));
    if (best == 0.0) return 0.0;
  }
  return best;
}

double ShapeSet::distance(cplx p) const {
  return std::max(0.0, base_distance(p) - offset_);
}

bool ShapeSet::contains(cplx p) const { return distance(p) == 0.0; }

bool ShapeSet::cell_meets(const Box& cell, double pitch) const {
  if (offset_ > 0.0) {
    // conservative: compare center distance against offset plus cell radius
    cplx c{0.5 * (cell.x0 + cell.x1), 0.5 * (cell.y0 + cell.y1)};
    return base_distance(c) <= offset_ + pitch * 0.7071067811865476;
  }
  bool hit = false;
  for (const Shape& s : shapes_)
    if (shape_meets_cell(s, cell)) { hit = true; break; }
  if (!hit) return false;
  for (const Shape& h : holes_) {
    bool swallowed = true;
    for (cplx c : box_corners(cell))
      if (!hole_contains_open(h, c)) { swallowed = false; break; }
    if (swallowed && std::get_if<PolyShape>(&h)) {
      // corners inside is not conclusive for polygons; boundary may dip in
      const auto& v = std::get<PolyShape>(h).v;
      for (size_t i = 0; i < v.size() && swallowed; ++i)
        if (segment_meets_box(v[i], v[(i + 1) % v.size()], cell)) swallowed = false;
    }
    if (swallowed) return false;
  }
  return true;
}

double ShapeSet::radius_about(cplx c) const {
  double best = 0;
  for (const Shape& s : shapes_) {
    double r = std::visit(
        [c](const auto& sh) -> double {
          using T = std::decay_t<decltype(sh)>;
          if constexpr (std::is_same_v<T, DiscShape>)
            return std::abs(sh.c - c) + sh.r;
          else if constexpr (std::is_same_v<T, CircleShape>)
            return std::abs(sh.c - c) + sh.r;
          else if constexpr (std::is_same_v<T, AnnulusShape>)
            return std::abs(sh.c - c) + sh.rout;
          else if constexpr (std::is_same_v<T, RectShape>) {
            double best = 0;
            for (cplx q : box_corners(sh.b)) best = std::max(best, std::abs(q - c));
            return best;
          } else if constexpr (std::is_same_v<T, PolyShape>) {
            double best = 0;
            for (cplx q : sh.v) best = std::max(best, std::abs(q - c));
            return best;
          } else {
            double best = 0;
            for (cplx q : sh.p) best = std::max(best, std::abs(q - c));
            return best;
          }
        },
        s);
    best = std::max(best, r);
  }
  return best + offset_;
}

bool ShapeSet::degenerate() const {
  for (const Shape& s : shapes_) {
    bool thin = std::holds_alternative<PointsShape>(s) ||
                std::holds_alternative<CircleShape>(s);
    if (!thin) {
      if (auto* r = std::get_if<RectShape>(&s))
        thin = r->b.width() == 0.0 || r->b.height() == 0.0;
    }
    if (!thin) return false;
  }
  return offset_ == 0.0;
}

ShapeSet ShapeSet::merged(const std::vector<const ShapeSet*>& parts) {
  std::vector<Shape> shapes, holes;
  for (const ShapeSet* p : parts) {
    if (p->offset_ != 0.0)
      fail(ErrorCode::Internal, "cannot merge offset shape sets");
    shapes.insert(shapes.end(), p->shapes_.begin(), p->shapes_.end());
    holes.insert(holes.end(), p->holes_.begin(), p->holes_.end());
  }
  return ShapeSet(std::move(shapes), std::move(holes));
}

}  // namespace rungekit
