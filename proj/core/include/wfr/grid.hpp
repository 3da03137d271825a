#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wfr {

/// Thrown when two fields or a field and a grid disagree on layout.
class LayoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform Cartesian grid of cells on a box in dimension 1 or 2.
///
/// Cells are stored with axis 0 fastest: the flat index of cell (i, j) is
/// `j * extent(0) + i`.
class Grid {
 public:
  Grid() = default;

  static Grid line(int n, double length = 1.0, double origin = 0.0);
  static Grid box(int n0, int n1, double length0 = 1.0, double length1 = 1.0,
                  double origin0 = 0.0, double origin1 = 0.0);

  int dim() const { return dim_; }
  int extent(int axis) const { return extents_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  double origin(int axis) const { return origins_[axis]; }
  double spacing(int axis) const { return lengths_[axis] / extents_[axis]; }
  std::size_t size() const;
  double cell_volume() const;
  double box_volume() const;

  /// Measure of a face orthogonal to `axis` (1 in dimension 1).
  double face_measure(int axis) const;

  /// Stride between neighbours along `axis` in the flat layout.
  std::size_t stride(int axis) const { return axis == 0 ? 1 : std::size_t(extents_[0]); }

  /// Per-axis cell index of a flat index.
  int coord(std::size_t flat, int axis) const;

  double center(int axis, int index) const { return origins_[axis] + (index + 0.5) * spacing(axis); }
  std::array<double, 2> cell_center(std::size_t flat) const;

  friend bool operator==(const Grid&, const Grid&) = default;

  std::string describe() const;

 private:
  int dim_ = 1;
  std::array<int, 2> extents_{2, 1};
  std::array<double, 2> lengths_{1.0, 1.0};
  std::array<double, 2> origins_{0.0, 0.0};
};

/// Real-valued cell-centred field. Densities, potentials and pressures all
/// use this layout.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  template <class Fn>
  static Field from_function(const Grid& grid, Fn&& fn) {
    Field f(grid);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = fn(grid.cell_center(k));
    return f;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double max() const;
  double min() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// A density is a nonnegative cell field; nonnegativity is checked by the
/// solvers that consume it.
using DensityField = Field;

/// Face-centred vector field: one component per interior-or-boundary face
/// orthogonal to each axis. Boundary faces carry the normal flux and are
/// zero for every field produced by `gradient`.
class FaceField {
 public:
  FaceField() = default;
  explicit FaceField(const Grid& grid);

  const Grid& grid() const { return grid_; }
  /// Number of faces orthogonal to `axis`: (n_axis + 1) * n_other.
  std::size_t face_count(int axis) const { return components_[axis].size(); }
  std::span<double> component(int axis) { return components_[axis]; }
  std::span<const double> component(int axis) const { return components_[axis]; }

  /// Face on the low side of cell (i, j) along `axis`; the index along
  /// `axis` runs over [0, n_axis], the other over the cells.
  std::size_t face_index(int axis, int i, int j) const;

 private:
  Grid grid_;
  std::array<std::vector<double>, 2> components_;
};

void require_same_grid(const Grid& a, const Grid& b, const char* what);

/// Integral of a cell field: sum of values times cell volume.
double mass(const Field& f);

/// Discrete BV norm: jumps across interior faces weighted by face measure,
/// plus the L1 norm.
double total_variation(const Field& f);

/// Weighted L1 norm of the difference of two fields on the same grid.
double l1_distance(const Field& a, const Field& b);

/// Cell-weighted inner product.
double inner(const Field& a, const Field& b);

/// Face-weighted inner product (weight = cell volume per face).
double inner(const FaceField& a, const FaceField& b);

/// Kernel evaluated on a displacement x_i - x_j.
using Kernel = std::function<double(const std::array<double, 2>&)>;

/// Direct midpoint quadrature: out_i = sum_j kernel(x_i - x_j) f_j vol.
Field convolve(const Kernel& kernel, const Field& f);

/// Exact fast path for the kernel |x|^2 using moment expansion; agrees with
/// `convolve` to rounding.
Field convolve_quadratic(const Field& f);

/// Forward difference across interior faces; boundary faces are zero.
FaceField gradient(const Field& f);

/// Flux divergence with zero normal flux on the boundary (boundary face
/// values are ignored). Negative adjoint of `gradient`.
Field divergence(const FaceField& v);

}  // namespace wfr
