#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "wfr/grid.hpp"

namespace wfr {

/// Discrete space-time gradient used by the augmented-Lagrangian transport
/// solver on [0,1] x Omega.
///
/// The potential phi lives on (n_t + 1) inner-time nodes times spatial
/// cells. For each time slab j (between nodes j and j+1) and cell i:
///
///   a[j,i]      = (phi[j+1,i] - phi[j,i]) / dt
///   b+[j,d,i]   = forward difference of the slab average along axis d
///   b-[j,d,i]   = backward difference of the slab average along axis d
///   c[i]        = -phi[n_t,i]          (only with a free final density)
///
/// One-sided differences that would cross the boundary are zero, which is
/// the zero-flux condition. The kinetic constraint set for (a, b) at each
/// point is a + |b|^2 / 4 <= 0 (two copies of each direction).
///
/// Inner products carry the weight dt*vol on (a, b) and vol on c.
class SpaceTimeOperator {
 public:
  SpaceTimeOperator(const Grid& grid, int n_t, bool final_term);

  const Grid& grid() const { return grid_; }
  int n_t() const { return n_t_; }
  bool final_term() const { return final_term_; }
  double dt() const { return dt_; }
  std::size_t cells() const { return cells_; }
  std::size_t nodes() const { return cells_ * std::size_t(n_t_ + 1); }
  std::size_t slab_points() const { return cells_ * std::size_t(n_t_); }
  /// Number of b components per space-time point (2 per axis).
  int copies() const { return 2 * grid_.dim(); }
  double slab_weight() const { return dt_ * grid_.cell_volume(); }
  double final_weight() const { return grid_.cell_volume(); }

  /// b layout: b[(j * copies + 2*d + s) * cells + i], s = 0 forward, 1 backward.
  std::size_t b_index(std::size_t slab, int copy, std::size_t cell) const {
    return (slab * std::size_t(copies()) + std::size_t(copy)) * cells_ + cell;
  }

  void apply(std::span<const double> phi, std::span<double> a, std::span<double> b,
             std::span<double> c) const;

  /// out = Lambda^T W (a, b, c), weights included.
  void adjoint_weighted(std::span<const double> a, std::span<const double> b,
                        std::span<const double> c, std::span<double> out) const;

  /// out = Lambda^T W Lambda phi.
  void apply_normal(std::span<const double> phi, std::span<double> out) const;

  /// Diagonal of Lambda^T W Lambda.
  std::vector<double> normal_diagonal() const;

 private:
  Grid grid_;
  int n_t_;
  bool final_term_;
  double dt_;
  std::size_t cells_;
  mutable std::vector<double> sa_, sb_, sc_;
};

/// Direct solver for Lambda^T W Lambda phi = rhs: cosine transform in space
/// (which diagonalises the Neumann Laplacian, computed with FFTW) followed by
/// one tridiagonal solve in inner time per spatial mode. Without a final
/// term the constant mode is singular; the returned solution then has zero
/// mean on that mode.
class SpectralPoissonSolver {
 public:
  explicit SpectralPoissonSolver(const SpaceTimeOperator& op);
  ~SpectralPoissonSolver();
  SpectralPoissonSolver(const SpectralPoissonSolver&) = delete;
  SpectralPoissonSolver& operator=(const SpectralPoissonSolver&) = delete;

  void solve(std::span<const double> rhs, std::span<double> phi) const;

 private:
  struct Plans;

  Grid grid_;
  int n_t_;
  std::size_t cells_;
  double scale_;                        // inverse of the unnormalised round trip
  std::vector<double> cprime_, denom_;  // Thomas factors per (mode, node)
  std::vector<double> offdiag_;         // per mode
  std::vector<char> singular_;          // per mode
  std::unique_ptr<Plans> plans_;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Matrix-free Jacobi-preconditioned conjugate gradient on the same system.
class CgPoissonSolver {
 public:
  CgPoissonSolver(const SpaceTimeOperator& op, double rel_tol, int max_iter);
  /// `phi` holds the initial guess on entry.
  CgResult solve(std::span<const double> rhs, std::span<double> phi) const;

 private:
  const SpaceTimeOperator* op_;
  double rel_tol_;
  int max_iter_;
  std::vector<double> inv_diag_;
  mutable std::vector<double> r_, z_, p_, ap_;
};

/// Euclidean projection of (a, b) onto {a + beta |b|^2 <= 0}. `b` is
/// projected in place; returns the projected a. Points already inside are
/// returned unchanged.
double project_paraboloid(double a, std::span<double> b, double beta = 0.25);

}  // namespace wfr
