#pragma once
#include <cassert>
#include <complex>
#include <cstdint>
#include <vector>

namespace rungekit {

using cplx = std::complex<double>;

// Axis-aligned bounding box in the plane.
struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  cplx center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool contains(cplx p) const {
    return p.real() >= x0 && p.real() <= x1 && p.imag() >= y0 && p.imag() <= y1;
  }
  void expand(double m) { x0 -= m; y0 -= m; x1 += m; y1 += m; }
  void include(cplx p) {
    if (p.real() < x0) x0 = p.real();
    if (p.real() > x1) x1 = p.real();
    if (p.imag() < y0) y0 = p.imag();
    if (p.imag() > y1) y1 = p.imag();
  }
  void include(const Box& b) {
    include(cplx{b.x0, b.y0});
    include(cplx{b.x1, b.y1});
  }
};

// Dense row-major raster over a box.  Cell (i,j) covers
// [x0+i*h, x0+(i+1)*h] x [y0+j*h, y0+(j+1)*h]; i runs along x, j along y.
template <class T>
class Grid {
public:
  Grid() = default;
  Grid(double x0, double y0, double h, int nx, int ny, T init = T{})
      : x0_(x0), y0_(y0), h_(h), nx_(nx), ny_(ny),
        data_(static_cast<size_t>(nx) * ny, init) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double pitch() const { return h_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }

  T& at(int i, int j) { return data_[idx(i, j)]; }
  const T& at(int i, int j) const { return data_[idx(i, j)]; }
  bool in_range(int i, int j) const {
    return i >= 0 && i < nx_ && j >= 0 && j < ny_;
  }

  cplx cell_center(int i, int j) const {
    return {x0_ + (i + 0.5) * h_, y0_ + (j + 0.5) * h_};
  }
  cplx corner(int i, int j) const {  // lower-left corner of cell (i,j)
    return {x0_ + i * h_, y0_ + j * h_};
  }
  // Cell containing p (clamped to range so callers can test membership after).
  std::pair<int, int> locate(cplx p) const {
    int i = static_cast<int>(std::floor((p.real() - x0_) / h_));
    int j = static_cast<int>(std::floor((p.imag() - y0_) / h_));
    return {i, j};
  }
  size_t idx(int i, int j) const {
    assert(in_range(i, j));
    return static_cast<size_t>(j) * nx_ + i;
  }
  size_t size() const { return data_.size(); }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

private:
  double x0_ = 0, y0_ = 0, h_ = 1;
  int nx_ = 0, ny_ = 0;
  std::vector<T> data_;
};

using BitGrid = Grid<uint8_t>;
using LabelGrid = Grid<int32_t>;

}  // namespace rungekit
