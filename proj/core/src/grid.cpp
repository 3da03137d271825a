#include "wfr/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wfr {

Grid Grid::line(int n, double length, double origin) {
  if (n < 2) throw std::invalid_argument("grid extent must be >= 2");
  if (!(length > 0.0)) throw std::invalid_argument("grid length must be > 0");
  Grid g;
  g.dim_ = 1;
  g.extents_ = {n, 1};
  g.lengths_ = {length, 1.0};
  g.origins_ = {origin, 0.0};
  return g;
}

Grid Grid::box(int n0, int n1, double length0, double length1, double origin0, double origin1) {
  if (n0 < 2 || n1 < 2) throw std::invalid_argument("grid extents must be >= 2");
  if (!(length0 > 0.0) || !(length1 > 0.0)) throw std::invalid_argument("grid lengths must be > 0");
  Grid g;
  g.dim_ = 2;
  g.extents_ = {n0, n1};
  g.lengths_ = {length0, length1};
  g.origins_ = {origin0, origin1};
  return g;
}

std::size_t Grid::size() const { return std::size_t(extents_[0]) * std::size_t(extents_[1]); }

double Grid::cell_volume() const {
  double v = spacing(0);
  if (dim_ == 2) v *= spacing(1);
  return v;
}

double Grid::box_volume() const { return dim_ == 2 ? lengths_[0] * lengths_[1] : lengths_[0]; }

double Grid::face_measure(int axis) const {
  if (dim_ == 1) return 1.0;
  return spacing(1 - axis);
}

int Grid::coord(std::size_t flat, int axis) const {
  const auto n0 = std::size_t(extents_[0]);
  return axis == 0 ? int(flat % n0) : int(flat / n0);
}

std::array<double, 2> Grid::cell_center(std::size_t flat) const {
  std::array<double, 2> x{center(0, coord(flat, 0)), 0.0};
  if (dim_ == 2) x[1] = center(1, coord(flat, 1));
  return x;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os << "d=" << dim_ << " n=" << extents_[0];
  if (dim_ == 2) os << 'x' << extents_[1];
  os << " box=" << lengths_[0];
  if (dim_ == 2) os << 'x' << lengths_[1];
  return os.str();
}

Field::Field(const Grid& grid, double value) : grid_(grid), values_(grid.size(), value) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw LayoutError("field value count does not match grid");
}

double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }
double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid_, other.grid_, "field +=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid_, other.grid_, "field -=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

Field& Field::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

FaceField::FaceField(const Grid& grid) : grid_(grid) {
  const auto n0 = std::size_t(grid.extent(0));
  const auto n1 = std::size_t(grid.extent(1));
  components_[0].assign((n0 + 1) * n1, 0.0);
  if (grid.dim() == 2) components_[1].assign(n0 * (n1 + 1), 0.0);
}

std::size_t FaceField::face_index(int axis, int i, int j) const {
  const auto n0 = std::size_t(grid_.extent(0));
  if (axis == 0) return std::size_t(j) * (n0 + 1) + std::size_t(i);
  return std::size_t(j) * n0 + std::size_t(i);
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw LayoutError(std::string(what) + ": grids differ");
}

double mass(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

double total_variation(const Field& f) {
  const Grid& g = f.grid();
  const int n0 = g.extent(0);
  const int n1 = g.extent(1);
  double tv = 0.0;
  for (int axis = 0; axis < g.dim(); ++axis) {
    double jumps = 0.0;
    const std::size_t s = g.stride(axis);
    for (int j = 0; j < n1; ++j) {
      for (int i = 0; i < n0; ++i) {
        const int c = axis == 0 ? i : j;
        if (c + 1 >= g.extent(axis)) continue;
        const std::size_t k = std::size_t(j) * std::size_t(n0) + std::size_t(i);
        jumps += std::abs(f[k + s] - f[k]);
      }
    }
    tv += jumps * g.face_measure(axis);
  }
  double l1 = 0.0;
  for (double v : f.values()) l1 += std::abs(v);
  return tv + l1 * g.cell_volume();
}

double l1_distance(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "l1_distance");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s * a.grid().cell_volume();
}

double inner(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * a.grid().cell_volume();
}

double inner(const FaceField& a, const FaceField& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  double s = 0.0;
  for (int axis = 0; axis < a.grid().dim(); ++axis) {
    auto ca = a.component(axis);
    auto cb = b.component(axis);
    for (std::size_t k = 0; k < ca.size(); ++k) s += ca[k] * cb[k];
  }
  return s * a.grid().cell_volume();
}

Field convolve(const Kernel& kernel, const Field& f) {
  const Grid& g = f.grid();
  const double vol = g.cell_volume();
  Field out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto xi = g.cell_center(i);
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (f[j] == 0.0) continue;
      const auto xj = g.cell_center(j);
      s += kernel({xi[0] - xj[0], xi[1] - xj[1]}) * f[j];
    }
    out[i] = s * vol;
  }
  return out;
}

Field convolve_quadratic(const Field& f) {
  // |x - y|^2 = |x|^2 - 2 x.y + |y|^2, so three moments of f suffice.
  const Grid& g = f.grid();
  const double vol = g.cell_volume();
  double m0 = 0.0, m2 = 0.0;
  std::array<double, 2> m1{0.0, 0.0};
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto y = g.cell_center(j);
    m0 += f[j];
    m1[0] += y[0] * f[j];
    m1[1] += y[1] * f[j];
    m2 += (y[0] * y[0] + y[1] * y[1]) * f[j];
  }
  Field out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.cell_center(i);
    const double xx = x[0] * x[0] + x[1] * x[1];
    out[i] = (xx * m0 - 2.0 * (x[0] * m1[0] + x[1] * m1[1]) + m2) * vol;
  }
  return out;
}

FaceField gradient(const Field& f) {
  const Grid& g = f.grid();
  FaceField v(g);
  const int n0 = g.extent(0);
  const int n1 = g.extent(1);
  for (int axis = 0; axis < g.dim(); ++axis) {
    auto comp = v.component(axis);
    const double inv = 1.0 / g.spacing(axis);
    const std::size_t s = g.stride(axis);
    for (int j = 0; j < n1; ++j) {
      for (int i = 0; i < n0; ++i) {
        const int c = axis == 0 ? i : j;
        if (c == 0) continue;
        const std::size_t k = std::size_t(j) * std::size_t(n0) + std::size_t(i);
        comp[v.face_index(axis, i, j)] = (f[k] - f[k - s]) * inv;
      }
    }
  }
  return v;
}

Field divergence(const FaceField& v) {
  const Grid& g = v.grid();
  Field out(g);
  const int n0 = g.extent(0);
  const int n1 = g.extent(1);
  for (int axis = 0; axis < g.dim(); ++axis) {
    auto comp = v.component(axis);
    const double inv = 1.0 / g.spacing(axis);
    const int n = g.extent(axis);
    for (int j = 0; j < n1; ++j) {
      for (int i = 0; i < n0; ++i) {
        const int c = axis == 0 ? i : j;
        const int ip = axis == 0 ? i + 1 : i;
        const int jp = axis == 0 ? j : j + 1;
        const double lo = c == 0 ? 0.0 : comp[v.face_index(axis, i, j)];
        const double hi = c + 1 == n ? 0.0 : comp[v.face_index(axis, ip, jp)];
        out[std::size_t(j) * std::size_t(n0) + std::size_t(i)] += (hi - lo) * inv;
      }
    }
  }
  return out;
}

}  // namespace wfr
