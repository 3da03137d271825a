#include "wfr/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wfr/scalar_root.hpp"

namespace wfr {
namespace {

constexpr double kProxTol = 1e-11;
constexpr int kProxMaxNewton = 60;
constexpr double kTinyDensity = 1e-300;

// z^e for z > 0 in log space.
double pow_log(double z, double e) { return std::exp(e * std::log(std::max(z, kTinyDensity))); }

}  // namespace

Nonlinearity Nonlinearity::power(double m) {
  if (!(m > 1.0)) throw std::invalid_argument("power nonlinearity requires m > 1");
  return Nonlinearity(Kind::Power, m);
}

double Nonlinearity::value(double z) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Entropy:
      return z > 0.0 ? z * std::log(z) - z : 0.0;
    case Kind::Power:
      return z > 0.0 ? pow_log(z, m_) / (m_ - 1.0) : 0.0;
  }
  return 0.0;
}

double Nonlinearity::derivative(double z) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Entropy:
      return z > 0.0 ? std::log(z) : -std::numeric_limits<double>::infinity();
    case Kind::Power:
      return pressure_value(z, m_);
  }
  return 0.0;
}

double Nonlinearity::derivative_inverse(double y) const {
  switch (kind_) {
    case Kind::Zero:
      return std::numeric_limits<double>::infinity();
    case Kind::Entropy:
      return std::exp(y);
    case Kind::Power:
      return y > 0.0 ? pow_log(y * (m_ - 1.0) / m_, 1.0 / (m_ - 1.0)) : 0.0;
  }
  return 0.0;
}

EnergySpec::EnergySpec(Nonlinearity f, Field potential, EnergySide side, std::optional<Field> weight)
    : f_(f), potential_(std::move(potential)), side_(side), weight_(std::move(weight)) {
  if (side_ == EnergySide::Reaction && f_.kind() == Nonlinearity::Kind::Entropy)
    throw std::invalid_argument("entropy is not admissible as a reaction-side energy");
  for (double v : potential_.values()) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(side_ == EnergySide::Diffusion
                                      ? "diffusion potential must be Lipschitz (finite on the grid)"
                                      : "reaction potential must be bounded");
    }
  }
  if (weight_) {
    require_same_grid(weight_->grid(), potential_.grid(), "energy weight");
    for (double w : weight_->values())
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("energy weight must be finite and >= 0");
  }
}

double energy_value(const EnergySpec& spec, const Field& rho) {
  require_same_grid(spec.grid(), rho.grid(), "energy_value");
  double s = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k)
    s += spec.weight(k) * spec.nonlinearity().value(rho[k]) + spec.potential()[k] * rho[k];
  return s * rho.grid().cell_volume();
}

double pressure_value(double rho, double m) {
  if (!(rho > 0.0)) return 0.0;
  return m / (m - 1.0) * pow_log(rho, m - 1.0);
}

PressureField pressure(const Field& rho, double m) {
  if (!(m > 1.0)) throw std::invalid_argument("pressure requires m > 1");
  PressureField p{Field(rho.grid()), m};
  for (std::size_t k = 0; k < rho.size(); ++k) p.values[k] = pressure_value(rho[k], m);
  return p;
}

double prox_internal(const Nonlinearity& f, double tau, double z, double v, double w, double hint) {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_internal requires tau > 0");
  // Fold the linear term into the centre: minimise (rho - zs)^2/(2 tau) + w F(rho).
  const double zs = z - tau * v;
  const double tw = tau * w;
  if (f.kind() == Nonlinearity::Kind::Zero || tw == 0.0) return std::max(zs, 0.0);

  const double ftol = kProxTol * (1.0 + std::abs(z)) * tau;
  if (f.kind() == Nonlinearity::Kind::Power) {
    if (zs <= 0.0) return 0.0;
    const double m = f.exponent();
    const double c = m / (m - 1.0);
    // g(rho) = rho - zs + tw c rho^(m-1), increasing and convex.
    auto g = [&](double r) {
      const double pm2 = pow_log(r, m - 2.0);
      return std::pair{r - zs + tw * c * pm2 * r, 1.0 + tw * m * pm2};
    };
    const double upper = std::min(zs, pow_log(zs / (tw * c), 1.0 / (m - 1.0)));
    const double start = hint > 0.0 && hint < upper ? hint : upper;
    const auto res = solve_increasing(g, 0.0, upper, start, ftol, kProxMaxNewton);
    if (!res.converged) throw ProxError("power prox did not converge (z=" + std::to_string(z) + ")");
    return res.x;
  }
  // Entropy: solve in u = log rho, g(u) = e^u - zs + tw u.
  auto g = [&](double u) {
    const double e = std::exp(u);
    return std::pair{e - zs + tw * u, e + tw};
  };
  const double hi = std::log(std::max(zs, 1.0));
  const double lo = std::min(0.0, (zs - 1.0) / tw);
  const double start = hint > 0.0 ? std::clamp(std::log(hint), lo, hi) : hi;
  const auto res = solve_increasing(g, lo, hi, start, ftol, kProxMaxNewton);
  if (!res.converged) throw ProxError("entropy prox did not converge (z=" + std::to_string(z) + ")");
  return std::exp(res.x);
}

}  // namespace wfr
