#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "wfr/grid.hpp"
#include "wfr/models.hpp"

namespace wfr::oracle {

// Reference implementations for tests and `wfr validate`. They are kept
// slow and simple and do not call into the solver modules.

class OracleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inverse CDF of a 1D density normalised to unit mass. `edges[j]` is the
/// cumulative mass at the left edge of cell j (edges.size() == n + 1).
struct QuantileRepresentation {
  std::vector<double> edges;
  double origin = 0.0;
  double dx = 0.0;
  double mass = 0.0;

  static QuantileRepresentation of(const Field& f);
  /// Q(s) for s in [0, 1].
  double quantile(double s) const;
};

/// mass * int_0^1 |Q0(s) - Q1(s)|^2 ds, composite midpoint with
/// max(10^4, 20 n) nodes. Masses must agree to 1e-10 relative.
double w2_exact_1d(const Field& rho0, const Field& rho1);

enum class FTag { Zero, Entropy, Power };

/// Convex scalar objectives behind the pointwise solvers.
///   Prox:      (x - z)^2 / (2 tau) + w F(x) + v x
///   FisherRao: 2 (sqrt(x) - sqrt(mu))^2 / h + kappa F(x) + u x
struct ScalarObjective {
  enum class Kind { Prox, FisherRao } kind = Kind::Prox;
  FTag f = FTag::Zero;
  double m = 2.0;
  double tau = 1.0, z = 0.0, v = 0.0, w = 1.0;
  double h = 0.1, mu = 0.0, u = 0.0, kappa = 1.0;

  long double value(long double x) const;
  long double derivative(long double x) const;
};

/// Minimiser of a convex objective on [lo, hi] by bisection on the sign of
/// its derivative (to about 1e-15 relative). A minimiser at lo = 0 is
/// accepted; otherwise throws if the bracket does not contain one.
double brute_force_pointwise(const ScalarObjective& obj, double lo, double hi);

/// Root of an increasing function on [lo, hi] by plain bisection.
double brute_force_root(const std::function<long double(long double)>& g, double lo, double hi);

/// Which terms of the scalar equation the reference integrates.
struct FdTerms {
  bool diffusion = true;
  bool drift = true;
  bool reaction = true;
};

/// Explicit finite differences for
///   d_t rho = Lap P1(rho) + div(rho grad V1) - rho (kappa F2'(rho) + V2)
/// on a 1D grid with zero-flux walls, P1 = rho F1' - F1. Internal steps are
/// chosen from the CFL limits; frames are returned at t = k h.
Trajectory fd_reference_scalar(const ModelConfig& cfg, const Field& rho0, FdTerms terms = {});

}  // namespace wfr::oracle
