#pragma once

#include <vector>

#include "wfr/energy.hpp"
#include "wfr/grid.hpp"

namespace wfr {

enum class LinearSolverKind { Spectral, ConjugateGradient };

/// Parameters of the augmented-Lagrangian (ALG2) transport solver.
struct WStepConfig {
  double tol = 1e-6;   ///< stop when max(primal, dual residual) <= tol
  int max_iter = 3000;
  int n_t = 8;         ///< inner time steps on [0, 1]
  double r_admm = 1.0; ///< augmentation parameter
  LinearSolverKind linear_solver = LinearSolverKind::Spectral;
  double cg_tol = 1e-10;
  int cg_max_iter = 20000;
};

/// Working state of one ALG2 solve: potential on inner-time nodes, the
/// density/momentum multipliers on slabs, the kinetic dual pair (a, b)
/// collocated with them, and the final-time density multiplier with its
/// dual variable.
struct SpaceTimeStaggered {
  Grid grid;
  int n_t = 0;
  double r_admm = 1.0;
  std::vector<double> phi;
  std::vector<double> rho;
  std::vector<double> momentum;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> rho_final;
  std::vector<double> c;
  std::vector<double> rho_start;  ///< pinned density at inner time 0
};

struct WStepReport {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// Discrete kinetic action, an estimate of W^2 between the endpoints.
  double action = 0.0;
  double energy_after = 0.0;
  /// Relative mass correction applied when renormalising the readout.
  double mass_correction = 0.0;
  int cg_iterations = 0;
  bool converged = false;
};

struct WStepResult {
  DensityField density;
  WStepReport report;
};

/// One JKO step argmin_{|rho| = |prev|} W^2(rho, prev) / (2h) + E(rho) on the
/// dynamic formulation. The density is read from the final-time multiplier,
/// clamped at zero and rescaled to the input mass. A non-converged solve
/// returns its last iterate with `report.converged == false`.
///
/// If `warm` is given and holds the state of an earlier solve on the same
/// grid and n_t, the iteration starts from it (shifted to the new initial
/// density); on return it holds the final state of this solve.
WStepResult wasserstein_jko_step(const DensityField& prev, const EnergySpec& spec, double h,
                                 const WStepConfig& cfg = {}, SpaceTimeStaggered* warm = nullptr);

struct W2Result {
  double value = 0.0;
  WStepReport report;
};

/// Squared Wasserstein distance between two equal-mass densities computed
/// by the same machinery with both endpoints pinned and no energy.
W2Result dynamic_w2(const DensityField& rho0, const DensityField& rho1, const WStepConfig& cfg = {});

}  // namespace wfr
