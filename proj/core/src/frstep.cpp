#include "wfr/frstep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wfr/parallel.hpp"
#include "wfr/scalar_root.hpp"

namespace wfr {
namespace {

void require_density(const Field& f, const char* what) {
  for (double v : f.values())
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
}

// kappa F'(r^2) r, i.e. the nonlinear part of the r-equation, and its r-derivative.
// Power: kappa m/(m-1) r^(2m-1), done in log space so that m = 100 neither
// overflows nor underflows early.
std::pair<double, double> nonlinear_term(const Nonlinearity& f, double kappa, double r) {
  if (f.kind() != Nonlinearity::Kind::Power || kappa == 0.0 || r <= 0.0) return {0.0, 0.0};
  const double m = f.exponent();
  const double lr = std::log(r);
  const double base = kappa * m / (m - 1.0);
  const double t = base * std::exp((2.0 * m - 1.0) * lr);
  const double dt = base * (2.0 * m - 1.0) * std::exp((2.0 * m - 2.0) * lr);
  return {t, dt};
}

}  // namespace

ReactionSpec::ReactionSpec(Nonlinearity f, Field potential, std::optional<Field> weight)
    : energy_(EnergySpec::reaction(f, std::move(potential), std::move(weight))) {}

ReactionSpec ReactionSpec::hele_shaw(const Grid& grid, double m) {
  return ReactionSpec(Kind::HeleShaw, EnergySpec::reaction(Nonlinearity::power(m), Field(grid, -1.0)));
}

ReactionSpec ReactionSpec::nutrient(double m, const Field& c, double c1, double c2) {
  Field kappa(c.grid());
  Field u(c.grid());
  for (std::size_t k = 0; k < c.size(); ++k) {
    kappa[k] = c[k] + c1;
    u[k] = c2 - c[k] - c1;
  }
  return ReactionSpec(Kind::Nutrient, EnergySpec::reaction(Nonlinearity::power(m), std::move(u), std::move(kappa)));
}

double ReactionSpec::max_negative_potential() const {
  double s = 0.0;
  for (double v : potential().values()) s = std::max(s, -v);
  return s;
}

double ReactionSpec::max_positive_potential() const {
  double s = 0.0;
  for (double v : potential().values()) s = std::max(s, v);
  return s;
}

double ReactionSpec::max_weight() const {
  double s = 0.0;
  for (std::size_t k = 0; k < grid().size(); ++k) s = std::max(s, weight(k));
  return s;
}

double fr_distance(const Field& rho, const Field& mu) {
  require_same_grid(rho.grid(), mu.grid(), "fr_distance");
  double s = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const double d = std::sqrt(std::max(rho[k], 0.0)) - std::sqrt(std::max(mu[k], 0.0));
    s += d * d;
  }
  return 4.0 * s * rho.grid().cell_volume();
}

SandwichBounds sandwich_bounds(const Field& mu, const ReactionSpec& spec, double h) {
  SandwichBounds b;
  b.upper = 1.0 + 3.0 * h * spec.max_negative_potential();
  const double top = b.upper * (mu.size() ? mu.max() : 0.0);
  double grow = spec.max_positive_potential();
  if (spec.nonlinearity().kind() == Nonlinearity::Kind::Power)
    grow += spec.max_weight() * spec.nonlinearity().derivative(top);
  b.lower = 1.0 / ((1.0 + 0.5 * h * grow) * (1.0 + 0.5 * h * grow));
  return b;
}

double fr_residual(double out, double mu, double h, const Nonlinearity& f, double u, double kappa) {
  const double so = std::sqrt(out);
  const double fp = out > 0.0 ? kappa * f.derivative(out) : 0.0;
  return std::abs((so - std::sqrt(mu)) * so + 0.5 * h * out * (fp + u)) / (1.0 + mu);
}

FrStepResult fisher_rao_step(const DensityField& mu, const ReactionSpec& spec, double h, const FrStepConfig& cfg) {
  require_same_grid(mu.grid(), spec.grid(), "fisher_rao_step");
  require_density(mu, "fisher_rao_step input");
  if (!(h > 0.0)) throw std::invalid_argument("fisher_rao_step requires h > 0");
  if (!(cfg.tol > 0.0) || cfg.max_newton < 0) throw std::invalid_argument("frstep.tol must be > 0 and frstep.max_newton >= 0");
  const double uneg = spec.max_negative_potential();
  if (!(h * uneg < 1.0))
    throw std::invalid_argument("fisher_rao_step: h * max(U^-) = " + std::to_string(h * uneg) + " must be < 1");

  const SandwichBounds bounds = sandwich_bounds(mu, spec, h);
  const Nonlinearity& f = spec.nonlinearity();
  DensityField out(mu.grid());
  std::vector<int> iters(mu.size(), 0);

  parallel_for(mu.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      if (mu[k] == 0.0) continue;  // support is preserved
      const double sm = std::sqrt(mu[k]);
      const double lin = 1.0 + 0.5 * h * spec.potential()[k];
      const double kappa = spec.weight(k);
      auto g = [&](double r) {
        const auto [t, dt] = nonlinear_term(f, kappa, r);
        return std::pair{lin * r + 0.5 * h * t - sm, lin + 0.5 * h * dt};
      };
      // g(0) = -sqrt(mu) < 0 and g(sqrt(upper mu)) >= 0 by the smallness condition.
      const double hi = std::sqrt(bounds.upper) * sm;
      const auto res = solve_increasing(g, 0.0, hi, sm, cfg.tol * (1.0 + sm), cfg.max_newton);
      out[k] = res.x * res.x;
      iters[k] = res.iterations;
    }
  });

  FrStepReport rep;
  rep.min_ratio = rep.max_ratio = 1.0;
  bool first = true;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (mu[k] == 0.0) continue;
    const double ratio = out[k] / mu[k];
    rep.min_ratio = first ? ratio : std::min(rep.min_ratio, ratio);
    rep.max_ratio = first ? ratio : std::max(rep.max_ratio, ratio);
    first = false;
    rep.max_residual = std::max(rep.max_residual, fr_residual(out[k], mu[k], h, f, spec.potential()[k], spec.weight(k)));
    rep.max_iterations = std::max(rep.max_iterations, iters[k]);
    ++rep.solved_cells;
  }
  return {std::move(out), rep};
}

DensityField fr_step_nutrient_c(const DensityField& c_half, const DensityField& rho_half, double h) {
  require_same_grid(c_half.grid(), rho_half.grid(), "fr_step_nutrient_c");
  require_density(c_half, "nutrient");
  require_density(rho_half, "density");
  DensityField out(c_half.grid());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double d = 1.0 + 0.5 * h * rho_half[k];
    out[k] = c_half[k] / (d * d);
  }
  return out;
}

}  // namespace wfr
