#include "wfr/wstep.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>

#include "wfr/parallel.hpp"
#include "wfr/spacetime.hpp"

namespace wfr {
namespace {

constexpr double kBeta = 0.25;  // a + |b|^2/4 <= 0 with two copies per axis

void validate_density(const DensityField& f, const char* what) {
  for (double v : f.values()) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
  }
}

// sum rho^2 / sum rho: the density level that carries the mass.
double density_scale(const DensityField& f) {
  double s1 = 0.0, s2 = 0.0;
  for (double v : f.values()) {
    s1 += v;
    s2 += v * v;
  }
  return s1 > 0.0 ? s2 / s1 : 1.0;
}

// ALG2 on min_phi <f, phi> + G(Lambda phi). `energy` and `h` are set for a
// JKO step (free final density); `target` is set when both ends are pinned.
class Alg2 {
 public:
  Alg2(const DensityField& start, const EnergySpec* energy, double h, const DensityField* target,
       const WStepConfig& cfg, const SpaceTimeStaggered* warm = nullptr)
      : cfg_(cfg),
        energy_(energy),
        h_(h),
        op_(start.grid(), cfg.n_t, energy != nullptr),
        weight_(op_.slab_weight()),
        scale_(density_scale(start)) {
    const std::size_t cells = op_.cells();
    st_.grid = start.grid();
    st_.n_t = cfg.n_t;
    // Densities are measured in units of the mass-weighted mean density,
    // which for the unscaled problem amounts to a penalty proportional to it.
    st_.r_admm = cfg.r_admm * scale_;
    st_.phi.assign(op_.nodes(), 0.0);
    st_.rho.resize(op_.slab_points());
    st_.momentum.assign(op_.slab_points() * std::size_t(op_.copies()), 0.0);
    st_.a.assign(op_.slab_points(), 0.0);
    st_.b.assign(st_.momentum.size(), 0.0);
    // Linear part of the objective: the pinned initial (and final) density.
    linear_.assign(op_.nodes(), 0.0);
    const double vol = start.grid().cell_volume();
    for (std::size_t i = 0; i < cells; ++i) linear_[i] = vol * start[i];
    if (target) {
      double* last = linear_.data() + std::size_t(cfg.n_t) * cells;
      for (std::size_t i = 0; i < cells; ++i) last[i] = -vol * (*target)[i];
    }
    for (int j = 0; j < cfg.n_t; ++j) {
      for (std::size_t i = 0; i < cells; ++i) {
        const double t = (j + 0.5) / cfg.n_t;
        st_.rho[std::size_t(j) * cells + i] = target ? (1.0 - t) * start[i] + t * (*target)[i] : start[i];
      }
    }
    if (energy_) {
      st_.rho_final.assign(start.values().begin(), start.values().end());
      st_.c.assign(cells, 0.0);
    }
    st_.rho_start.assign(start.values().begin(), start.values().end());
    if (warm && compatible(*warm)) resume(*warm);
    if (cfg.linear_solver == LinearSolverKind::Spectral) spectral_.emplace(op_);
    else cg_.emplace(op_, cfg.cg_tol, cfg.cg_max_iter);
    rhs_.resize(op_.nodes());
    la_.resize(op_.slab_points());
    lb_.resize(st_.b.size());
    lc_.resize(cells);
    primal_parts_.resize(op_.slab_points());
    dual_parts_.resize(op_.slab_points());
  }

  WStepReport run() {
    WStepReport rep;
    const double r = st_.r_admm;
    const double inv_r = 1.0 / r;
    const std::size_t cells = op_.cells();
    const std::size_t points = op_.slab_points();
    const int copies = op_.copies();
    const double total_weight = weight_ * double(points) + (energy_ ? op_.final_weight() * double(cells) : 0.0);

    std::vector<double> ga(points), gb(st_.b.size()), gc(cells);
    for (rep.iterations = 1; rep.iterations <= cfg_.max_iter; ++rep.iterations) {
      // (1) potential: r Lambda^T W Lambda phi = Lambda^T W (r q - sigma) - f.
      for (std::size_t k = 0; k < points; ++k) ga[k] = (r * st_.a[k] - st_.rho[k]) / r;
      for (std::size_t k = 0; k < gb.size(); ++k) gb[k] = (r * st_.b[k] - st_.momentum[k]) / r;
      if (energy_)
        for (std::size_t i = 0; i < cells; ++i) gc[i] = (r * st_.c[i] - st_.rho_final[i]) / r;
      op_.adjoint_weighted(ga, gb, gc, rhs_);
      for (std::size_t k = 0; k < rhs_.size(); ++k) rhs_[k] -= linear_[k] / r;
      if (spectral_) {
        spectral_->solve(rhs_, st_.phi);
      } else {
        const auto cg = cg_->solve(rhs_, st_.phi);
        rep.cg_iterations += cg.iterations;
      }
      op_.apply(st_.phi, la_, lb_, lc_);

      // (2) pointwise projection onto the kinetic paraboloid, (3) multipliers.
      parallel_for(points, [&](std::size_t begin, std::size_t end) {
        double bv[4];
        double* pa_out = st_.a.data();
        std::size_t j = begin / cells;
        std::size_t i = begin % cells;
        for (std::size_t k = begin; k < end; ++k) {
          const double va = la_[k] + st_.rho[k] * inv_r;
          double* bslab = st_.b.data() + op_.b_index(j, 0, i);
          double* mslab = st_.momentum.data() + op_.b_index(j, 0, i);
          const double* lslab = lb_.data() + op_.b_index(j, 0, i);
          for (int s = 0; s < copies; ++s) bv[s] = lslab[s * cells] + mslab[s * cells] * inv_r;
          const double a_old = pa_out[k];
          const double pa = project_paraboloid(va, std::span<double>(bv, std::size_t(copies)), kBeta);
          double pr = (la_[k] - pa) * (la_[k] - pa);
          double du = (pa - a_old) * (pa - a_old);
          pa_out[k] = pa;
          st_.rho[k] = r * (va - pa);
          for (int s = 0; s < copies; ++s) {
            const std::size_t o = std::size_t(s) * cells;
            const double vb = lslab[o] + mslab[o] * inv_r;
            pr += (lslab[o] - bv[s]) * (lslab[o] - bv[s]);
            du += (bv[s] - bslab[o]) * (bv[s] - bslab[o]);
            bslab[o] = bv[s];
            mslab[o] = r * (vb - bv[s]);
          }
          primal_parts_[k] = pr;
          dual_parts_[k] = du;
          if (++i == cells) {
            i = 0;
            ++j;
          }
        }
      });
      double primal = 0.0, dual = 0.0;
      for (std::size_t k = 0; k < points; ++k) {
        primal += primal_parts_[k];
        dual += dual_parts_[k];
      }
      primal *= weight_;
      dual *= weight_;

      if (energy_) {
        // Final-time substep: the multiplier becomes a prox of h E.
        const double tau = r * h_;
        const double wc = op_.final_weight();
        const double* phi_end = st_.phi.data() + std::size_t(cfg_.n_t) * cells;
        parallel_for(cells, [&](std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) {
            const double vc = lc_[i] + st_.rho_final[i] / r;
            const double rho1 =
                prox_internal(*energy_, tau, st_.rho_final[i] - r * phi_end[i], i, st_.rho_final[i]);
            gc[i] = vc - rho1 / r;  // new c
            st_.rho_final[i] = rho1;
          }
        });
        for (std::size_t i = 0; i < cells; ++i) {
          primal += wc * (lc_[i] - gc[i]) * (lc_[i] - gc[i]);
          dual += wc * (gc[i] - st_.c[i]) * (gc[i] - st_.c[i]);
          st_.c[i] = gc[i];
        }
      }

      rep.primal_residual = std::sqrt(primal / total_weight);
      rep.dual_residual = r * std::sqrt(dual / total_weight) / scale_;
      if (std::max(rep.primal_residual, rep.dual_residual) <= cfg_.tol) {
        rep.converged = true;
        break;
      }
    }
    if (rep.iterations > cfg_.max_iter) rep.iterations = cfg_.max_iter;
    rep.action = action();
    return rep;
  }

  const SpaceTimeStaggered& state() const { return st_; }
  SpaceTimeStaggered take_state() { return std::move(st_); }

 private:
  bool compatible(const SpaceTimeStaggered& w) const {
    return w.grid == st_.grid && w.n_t == st_.n_t && w.phi.size() == st_.phi.size() &&
           w.rho_start.size() == st_.rho_start.size() && w.rho_final.size() == st_.rho_final.size() &&
           w.c.size() == st_.c.size();
  }

  // Start from an earlier solution, moving its density multipliers by the
  // change of the pinned initial density.
  void resume(const SpaceTimeStaggered& w) {
    const std::size_t cells = op_.cells();
    st_.phi = w.phi;
    st_.a = w.a;
    st_.b = w.b;
    st_.c = w.c;
    st_.momentum = w.momentum;
    for (std::size_t k = 0; k < st_.rho.size(); ++k) {
      const std::size_t i = k % cells;
      st_.rho[k] = std::max(0.0, w.rho[k] + st_.rho_start[i] - w.rho_start[i]);
    }
    for (std::size_t i = 0; i < st_.rho_final.size(); ++i)
      st_.rho_final[i] = std::max(0.0, w.rho_final[i] + st_.rho_start[i] - w.rho_start[i]);
  }

  // W^2 estimate. On the paraboloid the multiplier satisfies m = rho b / 2,
  // so the kinetic cost sum |m|^2 / rho over the copies equals rho |b|^2 / 4
  // and W^2 is twice the total cost.
  double action() const {
    const std::size_t cells = op_.cells();
    double s = 0.0;
    for (std::size_t k = 0; k < op_.slab_points(); ++k) {
      const std::size_t j = k / cells;
      const std::size_t i = k % cells;
      double bb = 0.0;
      for (int c = 0; c < op_.copies(); ++c) {
        const double v = st_.b[op_.b_index(j, c, i)];
        bb += v * v;
      }
      s += st_.rho[k] * bb;
    }
    return 0.5 * weight_ * s;
  }

  WStepConfig cfg_;
  const EnergySpec* energy_;
  double h_;
  SpaceTimeOperator op_;
  double weight_;
  double scale_;
  SpaceTimeStaggered st_;
  std::vector<double> linear_, rhs_, la_, lb_, lc_;
  std::vector<double> primal_parts_, dual_parts_;
  std::optional<SpectralPoissonSolver> spectral_;
  std::optional<CgPoissonSolver> cg_;
};

void validate_config(const WStepConfig& cfg) {
  if (cfg.n_t < 1) throw std::invalid_argument("wstep.n_t must be >= 1");
  if (!(cfg.r_admm > 0.0)) throw std::invalid_argument("wstep.r_admm must be > 0");
  if (cfg.max_iter < 1) throw std::invalid_argument("wstep.max_iter must be >= 1");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("wstep.tol must be > 0");
}

}  // namespace

WStepResult wasserstein_jko_step(const DensityField& prev, const EnergySpec& spec, double h,
                                 const WStepConfig& cfg, SpaceTimeStaggered* warm) {
  validate_config(cfg);
  validate_density(prev, "wstep input");
  if (!(h > 0.0)) throw std::invalid_argument("wstep requires h > 0");
  if (spec.side() != EnergySide::Diffusion) throw std::invalid_argument("wstep requires a diffusion-side energy");
  require_same_grid(prev.grid(), spec.grid(), "wstep");
  const double m0 = mass(prev);
  if (!(m0 > 0.0)) throw std::invalid_argument("wstep input has zero mass");

  Alg2 solver(prev, &spec, h, nullptr, cfg, warm);
  WStepReport rep = solver.run();
  DensityField out(prev.grid(), solver.state().rho_final);
  if (warm) *warm = solver.take_state();
  for (auto& v : out.values()) v = std::max(v, 0.0);
  const double m1 = mass(out);
  if (!(m1 > 0.0)) throw std::runtime_error("wstep produced a zero-mass density");
  out *= m0 / m1;
  rep.mass_correction = std::abs(m0 / m1 - 1.0);
  rep.energy_after = energy_value(spec, out);
  return {std::move(out), rep};
}

W2Result dynamic_w2(const DensityField& rho0, const DensityField& rho1, const WStepConfig& cfg) {
  validate_config(cfg);
  validate_density(rho0, "dynamic_w2 source");
  validate_density(rho1, "dynamic_w2 target");
  require_same_grid(rho0.grid(), rho1.grid(), "dynamic_w2");
  const double m0 = mass(rho0);
  const double m1 = mass(rho1);
  if (std::abs(m0 - m1) > 1e-8 * std::max(std::abs(m0), std::abs(m1)))
    throw std::invalid_argument("dynamic_w2 requires equal masses");
  Alg2 solver(rho0, nullptr, 0.0, &rho1, cfg);
  const WStepReport rep = solver.run();
  return {rep.action, rep};
}

}  // namespace wfr
