#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>

#include "wfr/grid.hpp"

namespace wfr {

/// Internal energy density F.
///   Zero:     F(z) = 0
///   Entropy:  F(z) = z log z - z,   F'(z) = log z
///   Power(m): F(z) = z^m / (m - 1), F'(z) = m/(m-1) z^(m-1)
class Nonlinearity {
 public:
  enum class Kind { Zero, Entropy, Power };

  static Nonlinearity zero() { return Nonlinearity(Kind::Zero, 0.0); }
  static Nonlinearity entropy() { return Nonlinearity(Kind::Entropy, 0.0); }
  static Nonlinearity power(double m);

  Kind kind() const { return kind_; }
  /// Exponent m of a power law; 0 for the other kinds.
  double exponent() const { return m_; }

  /// F(z) for z >= 0, with F(0) taken as its limit 0.
  double value(double z) const;
  /// F'(z) for z > 0. Entropy returns -inf at 0.
  double derivative(double z) const;
  /// Inverse of F' on its range (used for barrier bounds).
  double derivative_inverse(double y) const;

  friend bool operator==(const Nonlinearity&, const Nonlinearity&) = default;

 private:
  Nonlinearity(Kind kind, double m) : kind_(kind), m_(m) {}
  Kind kind_ = Kind::Zero;
  double m_ = 0.0;
};

/// Which solver step an energy drives. Entropy is only admissible on the
/// diffusion (Wasserstein) side.
enum class EnergySide { Diffusion, Reaction };

/// E(rho) = sum_cells [ w F(rho) + V rho ] vol, with an optional per-cell
/// weight w >= 0 on F (default 1).
class EnergySpec {
 public:
  EnergySpec(Nonlinearity f, Field potential, EnergySide side,
             std::optional<Field> weight = std::nullopt);

  static EnergySpec diffusion(Nonlinearity f, Field potential) {
    return EnergySpec(f, std::move(potential), EnergySide::Diffusion);
  }
  static EnergySpec reaction(Nonlinearity f, Field potential, std::optional<Field> weight = std::nullopt) {
    return EnergySpec(f, std::move(potential), EnergySide::Reaction, std::move(weight));
  }

  const Nonlinearity& nonlinearity() const { return f_; }
  const Field& potential() const { return potential_; }
  const Grid& grid() const { return potential_.grid(); }
  EnergySide side() const { return side_; }
  double weight(std::size_t cell) const { return weight_ ? (*weight_)[cell] : 1.0; }
  bool has_weight() const { return weight_.has_value(); }

 private:
  Nonlinearity f_;
  Field potential_;
  EnergySide side_;
  std::optional<Field> weight_;
};

double energy_value(const EnergySpec& spec, const Field& rho);

struct PressureField {
  Field values;
  double m = 0.0;
};

/// p = m/(m-1) rho^(m-1), evaluated in log space so that large m stays
/// accurate; rho = 0 maps to p = 0.
PressureField pressure(const Field& rho, double m);
double pressure_value(double rho, double m);

class ProxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimiser over rho >= 0 of (rho - z)^2 / (2 tau) + w F(rho) + v rho.
/// `hint` (if positive) seeds the Newton iteration; the result does not
/// depend on it beyond the solver tolerance. Throws ProxError if the
/// safeguarded Newton iteration fails.
double prox_internal(const Nonlinearity& f, double tau, double z, double v = 0.0, double w = 1.0,
                     double hint = -1.0);

inline double prox_internal(const EnergySpec& spec, double tau, double z, std::size_t cell,
                            double hint = -1.0) {
  return prox_internal(spec.nonlinearity(), tau, z, spec.potential()[cell], spec.weight(cell), hint);
}

}  // namespace wfr
