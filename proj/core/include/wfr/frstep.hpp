#pragma once

#include <cstddef>
#include <optional>

#include "wfr/energy.hpp"
#include "wfr/grid.hpp"

namespace wfr {

/// Reaction energy E2(rho) = sum [kappa F(rho) + U rho] vol for the
/// Fisher-Rao step. F is Zero or Power(m); kappa defaults to 1.
///
///   generic:       any F, U, kappa
///   hele_shaw(m):  F = Power(m), U = -1
///   nutrient:      F = Power(m), kappa = c + c1, U = c2 - c - c1
class ReactionSpec {
 public:
  enum class Kind { Generic, HeleShaw, Nutrient };

  ReactionSpec(Nonlinearity f, Field potential, std::optional<Field> weight = std::nullopt);

  static ReactionSpec hele_shaw(const Grid& grid, double m);
  static ReactionSpec nutrient(double m, const Field& c, double c1, double c2);

  Kind kind() const { return kind_; }
  const Nonlinearity& nonlinearity() const { return energy_.nonlinearity(); }
  const Field& potential() const { return energy_.potential(); }
  double weight(std::size_t cell) const { return energy_.weight(cell); }
  const Grid& grid() const { return energy_.grid(); }
  /// The same functional as an EnergySpec (reaction side).
  const EnergySpec& energy() const { return energy_; }

  /// max over cells of the negative part of U.
  double max_negative_potential() const;
  double max_positive_potential() const;
  double max_weight() const;

 private:
  ReactionSpec(Kind kind, EnergySpec energy) : kind_(kind), energy_(std::move(energy)) {}
  Kind kind_ = Kind::Generic;
  EnergySpec energy_;
};

/// FR^2(rho, mu) = 4 sum (sqrt(rho) - sqrt(mu))^2 vol.
double fr_distance(const Field& rho, const Field& mu);

struct FrStepConfig {
  double tol = 1e-12;   ///< |g(r)| <= tol (1 + sqrt(mu)) on the equation in r = sqrt(rho)
  int max_newton = 60;
};

/// Pointwise factors out / mu that every step must respect:
///   upper = 1 + C h,  C = 3 max(U^-)
///   lower = 1 / (1 + h/2 (max(kappa) F'(upper max mu) + max(U^+)))^2
/// The lower factor is what the root bracket yields; it plays the role of
/// 1 - c h.
struct SandwichBounds {
  double lower = 1.0;
  double upper = 1.0;
};
SandwichBounds sandwich_bounds(const Field& mu, const ReactionSpec& spec, double h);

struct FrStepReport {
  double min_ratio = 1.0;  ///< over cells with mu > 0
  double max_ratio = 1.0;
  double max_residual = 0.0;  ///< max |(sqrt(out) - sqrt(mu)) sqrt(out) + h/2 out (kappa F' + U)| / (1 + mu)
  int max_iterations = 0;
  std::size_t solved_cells = 0;
};

struct FrStepResult {
  DensityField density;
  FrStepReport report;
};

/// argmin_rho FR^2(rho, mu) / (2h) + E2(rho), solved cell by cell in
/// r = sqrt(rho) from r (1 + h/2 (U + kappa F'(r^2))) = sqrt(mu).
/// Requires h max(U^-) < 1; throws std::invalid_argument otherwise.
FrStepResult fisher_rao_step(const DensityField& mu, const ReactionSpec& spec, double h,
                             const FrStepConfig& cfg = {});

/// Pointwise FR optimality residual for a single cell (scaled by 1 + mu).
double fr_residual(double out, double mu, double h, const Nonlinearity& f, double u, double kappa);

/// c_half / (1 + h/2 rho_half)^2, the FR step of the nutrient.
DensityField fr_step_nutrient_c(const DensityField& c_half, const DensityField& rho_half, double h);

}  // namespace wfr
