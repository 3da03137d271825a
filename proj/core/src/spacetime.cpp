#include "wfr/spacetime.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace wfr {

SpaceTimeOperator::SpaceTimeOperator(const Grid& grid, int n_t, bool final_term)
    : grid_(grid), n_t_(n_t), final_term_(final_term), dt_(1.0 / n_t), cells_(grid.size()) {
  if (n_t < 1) throw std::invalid_argument("n_t must be >= 1");
  sa_.resize(slab_points());
  sb_.resize(slab_points() * std::size_t(copies()));
  sc_.resize(cells_);
}

void SpaceTimeOperator::apply(std::span<const double> phi, std::span<double> a, std::span<double> b,
                              std::span<double> c) const {
  const double inv_dt = 1.0 / dt_;
  const int n0 = grid_.extent(0);
  const int n1 = grid_.extent(1);
  const int dim = grid_.dim();
  std::vector<double> avg(cells_);
  for (int j = 0; j < n_t_; ++j) {
    const double* p0 = phi.data() + std::size_t(j) * cells_;
    const double* p1 = p0 + cells_;
    double* aj = a.data() + std::size_t(j) * cells_;
    for (std::size_t i = 0; i < cells_; ++i) {
      aj[i] = (p1[i] - p0[i]) * inv_dt;
      avg[i] = 0.5 * (p0[i] + p1[i]);
    }
    for (int d = 0; d < dim; ++d) {
      const double inv_dx = 1.0 / grid_.spacing(d);
      const std::size_t s = grid_.stride(d);
      double* bp = b.data() + b_index(std::size_t(j), 2 * d, 0);
      double* bm = b.data() + b_index(std::size_t(j), 2 * d + 1, 0);
      const int n = grid_.extent(d);
      for (int y = 0; y < n1; ++y) {
        for (int x = 0; x < n0; ++x) {
          const std::size_t k = std::size_t(y) * std::size_t(n0) + std::size_t(x);
          const int cd = d == 0 ? x : y;
          bp[k] = cd + 1 < n ? (avg[k + s] - avg[k]) * inv_dx : 0.0;
          bm[k] = cd > 0 ? (avg[k] - avg[k - s]) * inv_dx : 0.0;
        }
      }
    }
  }
  if (final_term_) {
    const double* pn = phi.data() + std::size_t(n_t_) * cells_;
    for (std::size_t i = 0; i < cells_; ++i) c[i] = -pn[i];
  }
}

void SpaceTimeOperator::adjoint_weighted(std::span<const double> a, std::span<const double> b,
                                         std::span<const double> c, std::span<double> out) const {
  const double w = slab_weight();
  const double inv_dt = 1.0 / dt_;
  const int n0 = grid_.extent(0);
  const int n1 = grid_.extent(1);
  const int dim = grid_.dim();
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> g(cells_);
  for (int j = 0; j < n_t_; ++j) {
    double* o0 = out.data() + std::size_t(j) * cells_;
    double* o1 = o0 + cells_;
    const double* aj = a.data() + std::size_t(j) * cells_;
    std::fill(g.begin(), g.end(), 0.0);
    for (int d = 0; d < dim; ++d) {
      const double inv_dx = 1.0 / grid_.spacing(d);
      const std::size_t s = grid_.stride(d);
      const double* bp = b.data() + b_index(std::size_t(j), 2 * d, 0);
      const double* bm = b.data() + b_index(std::size_t(j), 2 * d + 1, 0);
      const int n = grid_.extent(d);
      for (int y = 0; y < n1; ++y) {
        for (int x = 0; x < n0; ++x) {
          const std::size_t k = std::size_t(y) * std::size_t(n0) + std::size_t(x);
          const int cd = d == 0 ? x : y;
          if (cd + 1 < n) {
            g[k + s] += bp[k] * inv_dx;
            g[k] -= bp[k] * inv_dx;
          }
          if (cd > 0) {
            g[k] += bm[k] * inv_dx;
            g[k - s] -= bm[k] * inv_dx;
          }
        }
      }
    }
    for (std::size_t i = 0; i < cells_; ++i) {
      o0[i] += w * (0.5 * g[i] - aj[i] * inv_dt);
      o1[i] += w * (0.5 * g[i] + aj[i] * inv_dt);
    }
  }
  if (final_term_) {
    double* on = out.data() + std::size_t(n_t_) * cells_;
    const double wc = final_weight();
    for (std::size_t i = 0; i < cells_; ++i) on[i] -= wc * c[i];
  }
}

void SpaceTimeOperator::apply_normal(std::span<const double> phi, std::span<double> out) const {
  apply(phi, sa_, sb_, sc_);
  adjoint_weighted(sa_, sb_, sc_, out);
}

std::vector<double> SpaceTimeOperator::normal_diagonal() const {
  std::vector<double> diag(nodes(), 0.0);
  const double w = slab_weight();
  for (int j = 0; j <= n_t_; ++j) {
    const double time_part = (j == 0 || j == n_t_) ? 1.0 : 2.0;
    for (std::size_t i = 0; i < cells_; ++i) {
      double lap = 0.0;
      for (int d = 0; d < grid_.dim(); ++d) {
        const int cd = grid_.coord(i, d);
        const int neighbours = (cd > 0) + (cd + 1 < grid_.extent(d));
        lap += neighbours / (grid_.spacing(d) * grid_.spacing(d));
      }
      // Two one-sided copies, each seeing a quarter of the slab-average square.
      double v = w * (time_part / (dt_ * dt_) + 2.0 * lap * 0.25 * time_part);
      if (final_term_ && j == n_t_) v += final_weight();
      diag[std::size_t(j) * cells_ + i] = v;
    }
  }
  return diag;
}

namespace {

double laplacian_eigenvalue(int k, int n, double dx) {
  const double s = std::sin(std::numbers::pi * k / (2.0 * n));
  return 4.0 * s * s / (dx * dx);
}

// FFTW planning is not thread safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct SpectralPoissonSolver::Plans {
  double* buffer = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  Plans(const Grid& grid, int levels) {
    const std::size_t cells = grid.size();
    std::lock_guard lock(fftw_planner_mutex());
    buffer = fftw_alloc_real(cells * std::size_t(levels));
    int n[2];
    fftw_r2r_kind fwd[2], inv[2];
    int rank = grid.dim();
    if (rank == 1) {
      n[0] = grid.extent(0);
    } else {
      n[0] = grid.extent(1);
      n[1] = grid.extent(0);
    }
    for (int d = 0; d < rank; ++d) {
      fwd[d] = FFTW_REDFT10;
      inv[d] = FFTW_REDFT01;
    }
    // FFTW_ESTIMATE keeps the chosen algorithm, and hence rounding, fixed.
    forward = fftw_plan_many_r2r(rank, n, levels, buffer, nullptr, 1, int(cells), buffer, nullptr, 1,
                                 int(cells), fwd, FFTW_ESTIMATE);
    inverse = fftw_plan_many_r2r(rank, n, levels, buffer, nullptr, 1, int(cells), buffer, nullptr, 1,
                                 int(cells), inv, FFTW_ESTIMATE);
    if (!forward || !inverse) throw std::runtime_error("FFTW planning failed");
  }

  ~Plans() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
    fftw_free(buffer);
  }
};

SpectralPoissonSolver::SpectralPoissonSolver(const SpaceTimeOperator& op)
    : grid_(op.grid()), n_t_(op.n_t()), cells_(op.cells()) {
  const int n0 = grid_.extent(0);
  const int n1 = grid_.extent(1);
  scale_ = 1.0 / (2.0 * n0);
  if (grid_.dim() == 2) scale_ /= 2.0 * n1;
  plans_ = std::make_unique<Plans>(grid_, n_t_ + 1);
  const std::size_t nodes = std::size_t(n_t_ + 1);
  cprime_.resize(cells_ * nodes);
  denom_.resize(cells_ * nodes);
  offdiag_.resize(cells_);
  singular_.assign(cells_, 0);

  const double w = op.slab_weight();
  const double dt = op.dt();
  std::vector<double> diag(nodes);
  for (std::size_t mode = 0; mode < cells_; ++mode) {
    const int k0 = grid_.coord(mode, 0);
    double lambda = laplacian_eigenvalue(k0, n0, grid_.spacing(0));
    if (grid_.dim() == 2) lambda += laplacian_eigenvalue(grid_.coord(mode, 1), n1, grid_.spacing(1));
    // Time operator: w [D^T D + 2 lambda A^T A] (+ final weight at the last node).
    const double e = w * (-1.0 / (dt * dt) + 2.0 * lambda * 0.25);
    for (std::size_t j = 0; j < nodes; ++j) {
      const double tp = (j == 0 || j + 1 == nodes) ? 1.0 : 2.0;
      diag[j] = w * (tp / (dt * dt) + 2.0 * lambda * 0.25 * tp);
    }
    if (op.final_term()) diag[nodes - 1] += op.final_weight();
    offdiag_[mode] = e;
    const bool singular = !op.final_term() && mode == 0;
    singular_[mode] = singular;
    // Thomas forward sweep; a singular mode pins node 0 and factors nodes 1..n_t.
    double* cp = cprime_.data() + mode * nodes;
    double* dn = denom_.data() + mode * nodes;
    const std::size_t start = singular ? 1 : 0;
    for (std::size_t j = start; j < nodes; ++j) {
      const double d = j == start ? diag[j] : diag[j] - e * cp[j - 1];
      dn[j] = d;
      cp[j] = e / d;
    }
  }
}

SpectralPoissonSolver::~SpectralPoissonSolver() = default;

void SpectralPoissonSolver::solve(std::span<const double> rhs, std::span<double> phi) const {
  double* work = plans_->buffer;
  std::copy(rhs.begin(), rhs.end(), work);
  fftw_execute(plans_->forward);
  const std::size_t nodes = std::size_t(n_t_ + 1);
  for (std::size_t mode = 0; mode < cells_; ++mode) {
    const double e = offdiag_[mode];
    const double* cp = cprime_.data() + mode * nodes;
    const double* dn = denom_.data() + mode * nodes;
    const std::size_t start = singular_[mode] ? 1 : 0;
    auto at = [&](std::size_t j) -> double& { return work[j * cells_ + mode]; };
    if (start == 1) at(0) = 0.0;
    double prev = 0.0;
    for (std::size_t j = start; j < nodes; ++j) {
      const double y = (at(j) - (j == start ? 0.0 : e * prev)) / dn[j];
      at(j) = y;
      prev = y;
    }
    for (std::size_t j = nodes - 1; j-- > start;) at(j) -= cp[j] * at(j + 1);
    if (start == 1) {
      double mean = 0.0;
      for (std::size_t j = 0; j < nodes; ++j) mean += at(j);
      mean /= double(nodes);
      for (std::size_t j = 0; j < nodes; ++j) at(j) -= mean;
    }
  }
  fftw_execute(plans_->inverse);
  for (std::size_t k = 0; k < phi.size(); ++k) phi[k] = work[k] * scale_;
}

CgPoissonSolver::CgPoissonSolver(const SpaceTimeOperator& op, double rel_tol, int max_iter)
    : op_(&op), rel_tol_(rel_tol), max_iter_(max_iter) {
  inv_diag_ = op.normal_diagonal();
  for (auto& d : inv_diag_) d = 1.0 / d;
  r_.resize(op.nodes());
  z_.resize(op.nodes());
  p_.resize(op.nodes());
  ap_.resize(op.nodes());
}

CgResult CgPoissonSolver::solve(std::span<const double> rhs, std::span<double> phi) const {
  const std::size_t n = rhs.size();
  const bool singular = !op_->final_term();
  // The singular system is consistent; keep iterates orthogonal to constants.
  auto deflate = [&](std::vector<double>& v) {
    if (!singular) return;
    double m = 0.0;
    for (double x : v) m += x;
    m /= double(n);
    for (double& x : v) x -= m;
  };
  op_->apply_normal(phi, ap_);
  double bnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r_[i] = rhs[i] - ap_[i];
    bnorm += rhs[i] * rhs[i];
  }
  deflate(r_);
  bnorm = std::sqrt(bnorm);
  CgResult res;
  if (bnorm == 0.0) bnorm = 1.0;
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z_[i] = r_[i] * inv_diag_[i];
    rz += r_[i] * z_[i];
  }
  p_ = z_;
  for (res.iterations = 0; res.iterations < max_iter_; ++res.iterations) {
    double rn = 0.0;
    for (double v : r_) rn += v * v;
    res.relative_residual = std::sqrt(rn) / bnorm;
    if (res.relative_residual <= rel_tol_) {
      res.converged = true;
      break;
    }
    op_->apply_normal(p_, ap_);
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p_[i] * ap_[i];
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] += alpha * p_[i];
      r_[i] -= alpha * ap_[i];
    }
    deflate(r_);
    double rz_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z_[i] = r_[i] * inv_diag_[i];
      rz_new += r_[i] * z_[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p_[i] = z_[i] + beta * p_[i];
  }
  return res;
}

double project_paraboloid(double a, std::span<double> b, double beta) {
  double bb = 0.0;
  for (double v : b) bb += v * v;
  if (a + beta * bb <= 0.0) return a;
  // Newton on f(l) = a - l + beta |b|^2 / (1 + 2 beta l)^2, convex and
  // decreasing, started left of the root so iterates increase monotonically.
  double l = 0.0;
  const double tol = 1e-12 * (1.0 + std::abs(a) + beta * bb);
  for (int it = 0; it < 40; ++it) {
    const double s = 1.0 + 2.0 * beta * l;
    const double s2 = s * s;
    const double f = a - l + beta * bb / s2;
    if (std::abs(f) <= tol) break;
    const double df = -1.0 - 4.0 * beta * beta * bb / (s2 * s);
    l -= f / df;
  }
  const double scale = 1.0 / (1.0 + 2.0 * beta * l);
  for (double& v : b) v *= scale;
  return a - l;
}

}  // namespace wfr
