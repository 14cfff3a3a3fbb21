#pragma once
#include <optional>
#include <vector>

#include "rungekit/errors.hpp"
#include "rungekit/shapes.hpp"

namespace rungekit {

// A compact set together with its raster: boolean mask over a padded grid,
// plus two distance fields (to the mask and to its complement, both measured
// between cell centers).  Immutable once built.
class PlanarCompact {
public:
  // pad is in length units and is clamped below to 2.5 * pitch; extra_cover
  // lists points (typically candidate poles) the grid must also contain.
  static PlanarCompact rasterize(const ShapeSet& set, double pitch,
                                 double pad = 0.0,
                                 const std::vector<cplx>& extra_cover = {});

  const ShapeSet& set() const { return set_; }
  const BitGrid& mask() const { return mask_; }
  const Grid<double>& mask_distance() const { return dist_mask_; }
  const Grid<double>& depth() const { return depth_; }
  double pitch() const { return mask_.pitch(); }
  Box bbox() const { return bbox_; }
  int cell_count() const { return cells_; }
  bool masked(int i, int j) const { return mask_.at(i, j) != 0; }

  // distance from p to the underlying exact set (shape arithmetic, not grid)
  double distance(cplx p) const { return set_.distance(p); }
  // Monomial bases are scaled about the exact set's frame, not the padded
  // grid's: a grid-snapped center can sit a whole pitch off the set center,
  // which inflates the basis radius and strangles every expansion ratio.
  cplx basis_center() const { return set_.bbox().center(); }
  double basis_radius() const { return set_.radius_about(basis_center()); }

private:
  ShapeSet set_;
  BitGrid mask_;
  Grid<double> dist_mask_;
  Grid<double> depth_;
  Box bbox_;
  int cells_ = 0;
};

// Connected components of the complement grid (4-connectivity).  Mask cells
// carry label -1.
struct ComplementComponents {
  LabelGrid labels;
  int count = 0;
  int unbounded = -1;            // label of the unique unbounded component
  std::vector<int> cell_counts;  // per component

  int label_at(cplx p) const;    // -1 when p falls in a mask cell / off-grid -> unbounded
};

ComplementComponents complement_components(const PlanarCompact& K);

// Poles for a compact: the list the caller supplied plus the component ->
// pole assignment proven by validate_pole_set.
struct PoleSet {
  std::vector<std::optional<cplx>> poles;  // nullopt encodes the point at infinity
  std::vector<int> assignment;             // component id -> index into poles
};

PoleSet validate_pole_set(const PlanarCompact& K, const ComplementComponents& comps,
                          const std::vector<std::optional<cplx>>& poles);

// A polygonal cycle surrounding the compact: boundary loops of the
// delta-dilated mask, lightly smoothed.  Loops are closed (last vertex joins
// the first); outer loops run counterclockwise, hole loops clockwise.
struct Cycle {
  struct Loop {
    std::vector<cplx> pts;
    double length = 0;
    std::vector<double> cumlen;  // cumlen[i] = arclength from pts[0] to pts[i]
    // point at arclength s (s wraps modulo length)
    cplx at(double s) const;
  };
  std::vector<Loop> loops;
  double delta = 0;
  double clearance = 0;  // certified min distance from the cycle to the set
  double total_length() const;
};

Cycle build_cycle(const PlanarCompact& K, double delta);

// winding number of the cycle around p (sum over loops); throws PointOnCycle
// when p lies within ~1e-9 of an edge.
int winding_number(const Cycle& c, cplx p);

// Sample points of the compact used for certification: boundary cells are
// sampled at pitch h/2^refine starting from refine=1 (4 points per cell),
// interior cells at pitch h/2^(refine-1).
struct SamplePlan {
  std::vector<cplx> boundary;
  std::vector<cplx> interior;
  std::vector<cplx> all;  // boundary followed by interior
};

SamplePlan sample_points(const PlanarCompact& K, int refine = 1);

// Shortest-path forest over "admissible" complement cells (one component,
// clearance >= 2.2 * pitch) rooted at a finite target cell or at the grid
// border for targets at infinity.  Used to route pole relocation.
class ReachTree {
public:
  static ReachTree build(const PlanarCompact& K, const ComplementComponents& comps,
                         int component, std::optional<cplx> target);
  // start first; for finite targets the exact target point is appended
  std::vector<cplx> waypoints_from(cplx start) const;
  int component() const { return component_; }

private:
  const PlanarCompact* K_ = nullptr;
  std::optional<cplx> target_;
  int component_ = -1;
  Grid<int32_t> parent_;  // index of parent cell, -2 unvisited, -1 root
};

// Felzenszwalb exact squared Euclidean distance transform; feature cells are
// those with seed[i]==0, output is distance in cell units.
std::vector<double> distance_transform(const std::vector<double>& seed, int nx, int ny);

}  // namespace rungekit
