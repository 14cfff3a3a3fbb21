#pragma once
#include <variant>
#include <vector>

#include "rungekit/grid.hpp"

namespace rungekit {

// Planar primitives.  Disc/Rect/Poly are solid (closed), Circle is the curve
// only, Annulus is the closed ring, Points a finite set.  Degenerate inputs
// (zero-width rects, point sets) are legal; they simply have empty interior.
struct DiscShape   { cplx c; double r; };
struct RectShape   { Box b; };
struct PolyShape   { std::vector<cplx> v; };  // simple closed polygon, >=3 vertices
struct PointsShape { std::vector<cplx> p; };
struct CircleShape { cplx c; double r; };
struct AnnulusShape{ cplx c; double rin, rout; };

using Shape = std::variant<DiscShape, RectShape, PolyShape, PointsShape,
                           CircleShape, AnnulusShape>;

Box shape_bbox(const Shape& s);
// Euclidean distance from p to the shape (0 when p lies on/in it).
double shape_distance(const Shape& s, cplx p);
// Does the closed cell box meet the shape?  Exact for all primitives.
bool shape_meets_cell(const Shape& s, const Box& cell);

// segment/polygon helpers shared by geometry code
double segment_distance(cplx p, cplx a, cplx b);
bool segments_cross(cplx a, cplx b, cplx c, cplx d);
bool point_in_polygon(const std::vector<cplx>& poly, cplx p);

// A compact set described by solid shapes minus open holes, optionally
// thickened by `offset` (metric dilation).  Holes must be pairwise disjoint
// and strictly inside the solid part; scene parsing enforces that.
class ShapeSet {
public:
  ShapeSet() = default;
  explicit ShapeSet(std::vector<Shape> shapes, std::vector<Shape> holes = {});

  const std::vector<Shape>& shapes() const { return shapes_; }
  const std::vector<Shape>& holes() const { return holes_; }
  double offset() const { return offset_; }
  ShapeSet with_offset(double delta) const;

  Box bbox() const;                 // includes offset
  bool empty() const { return shapes_.empty(); }
  bool contains(cplx p) const;      // closed membership
  double distance(cplx p) const;    // 0 inside; exact for offset sets too
  bool cell_meets(const Box& cell, double pitch) const;
  // max |z - c| over the set; used to size polynomial bases.
  double radius_about(cplx c) const;
  // true if every primitive has empty interior (points / circles)
  bool degenerate() const;
  // union of the solid parts of two sets (holes kept per operand only if
  // both hole lists are empty; union members in this codebase carry no holes)
  static ShapeSet merged(const std::vector<const ShapeSet*>& parts);

private:
  std::vector<Shape> shapes_;
  std::vector<Shape> holes_;
  double offset_ = 0;
  double base_distance(cplx p) const;  // distance ignoring offset
};

}  // namespace rungekit
