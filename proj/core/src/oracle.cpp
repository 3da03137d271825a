#include "wfr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wfr::oracle {
namespace {

FTag tag_of(const Nonlinearity& f) {
  switch (f.kind()) {
    case Nonlinearity::Kind::Entropy:
      return FTag::Entropy;
    case Nonlinearity::Kind::Power:
      return FTag::Power;
    default:
      return FTag::Zero;
  }
}

long double f_value(FTag t, long double m, long double x) {
  if (x <= 0) return 0;
  switch (t) {
    case FTag::Zero:
      return 0;
    case FTag::Entropy:
      return x * std::log(x) - x;
    case FTag::Power:
      return std::pow(x, m) / (m - 1);
  }
  return 0;
}

long double f_prime(FTag t, long double m, long double x) {
  switch (t) {
    case FTag::Zero:
      return 0;
    case FTag::Entropy:
      return x > 0 ? std::log(x) : -INFINITY;
    case FTag::Power:
      return x > 0 ? m / (m - 1) * std::pow(x, m - 1) : 0;
  }
  return 0;
}

// Pressure P(rho) = rho F'(rho) - F(rho) of the diffusion term.
double pressure_of(FTag t, double m, double rho) {
  switch (t) {
    case FTag::Entropy:
      return rho;
    case FTag::Power:
      return rho > 0.0 ? std::pow(rho, m) : 0.0;
    case FTag::Zero:
      return 0.0;
  }
  return 0.0;
}

// P'(rho), the local diffusivity.
double diffusivity(FTag t, double m, double rho) {
  switch (t) {
    case FTag::Entropy:
      return 1.0;
    case FTag::Power:
      return rho > 0.0 ? m * std::pow(rho, m - 1.0) : 0.0;
    case FTag::Zero:
      return 0.0;
  }
  return 0.0;
}

}  // namespace

QuantileRepresentation QuantileRepresentation::of(const Field& f) {
  if (f.grid().dim() != 1) throw OracleError("quantiles need a 1D field");
  QuantileRepresentation q;
  const std::size_t n = f.size();
  q.origin = f.grid().origin(0);
  q.dx = f.grid().spacing(0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (f[i] < 0.0) throw OracleError("quantiles need a nonnegative field");
    total += f[i];
  }
  if (!(total > 0.0)) throw OracleError("quantiles need positive mass");
  q.mass = total * q.dx;
  q.edges.resize(n + 1);
  double acc = 0.0;
  q.edges[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += f[i];
    q.edges[i + 1] = acc / total;
  }
  q.edges[n] = 1.0;
  return q;
}

double QuantileRepresentation::quantile(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  // first cell whose right edge reaches s
  const auto it = std::lower_bound(edges.begin() + 1, edges.end(), s);
  const std::size_t j = std::size_t(std::min<std::ptrdiff_t>(it - edges.begin(), std::ptrdiff_t(edges.size() - 1))) - 1;
  const double width = edges[j + 1] - edges[j];
  const double frac = width > 0.0 ? (s - edges[j]) / width : 0.0;
  return origin + (double(j) + std::clamp(frac, 0.0, 1.0)) * dx;
}

double w2_exact_1d(const Field& rho0, const Field& rho1) {
  const auto q0 = QuantileRepresentation::of(rho0);
  const auto q1 = QuantileRepresentation::of(rho1);
  if (std::abs(q0.mass - q1.mass) > 1e-10 * std::max(q0.mass, q1.mass))
    throw OracleError("w2_exact_1d needs equal masses");
  const std::size_t nodes = std::max<std::size_t>(10000, 20 * std::max(rho0.size(), rho1.size()));
  long double s = 0.0;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double t = (double(k) + 0.5) / double(nodes);
    const long double d = q0.quantile(t) - q1.quantile(t);
    s += d * d;
  }
  return double(q0.mass * s / nodes);
}

long double ScalarObjective::value(long double x) const {
  if (kind == Kind::Prox) return (x - z) * (x - z) / (2 * tau) + w * f_value(f, m, x) + v * x;
  const long double d = std::sqrt(x) - std::sqrt((long double)mu);
  return 2 * d * d / h + kappa * f_value(f, m, x) + u * x;
}

long double ScalarObjective::derivative(long double x) const {
  if (kind == Kind::Prox) return (x - z) / tau + w * f_prime(f, m, x) + v;
  if (x <= 0) return -INFINITY;
  return 2 * (std::sqrt(x) - std::sqrt((long double)mu)) / (h * std::sqrt(x)) + kappa * f_prime(f, m, x) + u;
}

double brute_force_pointwise(const ScalarObjective& obj, double lo, double hi) {
  if (!(hi > lo)) throw OracleError("empty bracket");
  long double a = lo, b = hi;
  const long double da = lo > 0.0 ? obj.derivative(a) : obj.derivative(std::nextafter(0.0L, 1.0L));
  if (da >= 0) {
    if (lo == 0.0) return 0.0;  // minimiser on the constraint
    throw OracleError("minimum lies left of the bracket");
  }
  if (obj.derivative(b) < 0) throw OracleError("minimum lies right of the bracket");
  for (int it = 0; it < 400 && b - a > 1e-16L * std::max(1.0L, b); ++it) {
    const long double c = 0.5L * (a + b);
    if (obj.derivative(c) < 0) a = c;
    else b = c;
  }
  return double(0.5L * (a + b));
}

double brute_force_root(const std::function<long double(long double)>& g, double lo, double hi) {
  long double a = lo, b = hi;
  if (g(a) > 0 || g(b) < 0) throw OracleError("no sign change on the bracket");
  for (int it = 0; it < 400 && b - a > 1e-16L * std::max(1.0L, b); ++it) {
    const long double c = 0.5L * (a + b);
    if (g(c) < 0) a = c;
    else b = c;
  }
  return double(0.5L * (a + b));
}

Trajectory fd_reference_scalar(const ModelConfig& cfg, const Field& rho0, FdTerms terms) {
  const Grid& g = cfg.grid;
  if (g.dim() != 1) throw OracleError("fd_reference_scalar is 1D only");
  require_same_grid(g, rho0.grid(), "fd_reference_scalar");
  const std::size_t n = g.size();
  const double dx = g.spacing(0);
  const FTag f1 = tag_of(cfg.diffusion);
  const double m1 = cfg.diffusion.exponent();
  const FTag f2 = tag_of(cfg.reaction);
  const double m2 = cfg.reaction.exponent();
  const Field v1 = make_potential(g, cfg.potential1);
  const Field v2 = make_potential(g, cfg.potential2);
  const double kappa = cfg.reaction_weight;

  // face velocities -dV1/dx are fixed
  std::vector<double> vel(n + 1, 0.0);
  double vmax = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    vel[i] = terms.drift ? -(v1[i] - v1[i - 1]) / dx : 0.0;
    vmax = std::max(vmax, std::abs(vel[i]));
  }

  Trajectory tr;
  tr.family = Family::Scalar;
  tr.steps = cfg.steps();
  tr.full.push_back({0, 0.0, rho0, {}, {}});
  std::vector<double> rho(rho0.values().begin(), rho0.values().end());
  std::vector<double> flux(n + 1, 0.0);
  double t = 0.0;
  for (int k = 1; k <= tr.steps; ++k) {
    const double t_end = k * cfg.h;
    while (t < t_end - 1e-14) {
      double dmax = 0.0, rmax = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (terms.diffusion) dmax = std::max(dmax, diffusivity(f1, m1, rho[i]));
        if (terms.reaction) {
          const double fp = rho[i] > 0.0 ? double(f_prime(f2, m2, rho[i])) : 0.0;
          rmax = std::max(rmax, std::abs(kappa * fp + v2[i]));
        }
      }
      double dt = t_end - t;
      if (dmax > 0.0) dt = std::min(dt, 0.4 * dx * dx / dmax);
      if (vmax > 0.0) dt = std::min(dt, 0.4 * dx / vmax);
      if (rmax > 0.0) dt = std::min(dt, 0.05 / rmax);

      for (std::size_t i = 1; i < n; ++i) {
        double fl = 0.0;
        if (terms.diffusion) fl -= (pressure_of(f1, m1, rho[i]) - pressure_of(f1, m1, rho[i - 1])) / dx;
        if (terms.drift) fl += vel[i] * (vel[i] > 0.0 ? rho[i - 1] : rho[i]);
        flux[i] = fl;
      }
      for (std::size_t i = 0; i < n; ++i) rho[i] -= dt * (flux[i + 1] - flux[i]) / dx;
      if (terms.reaction) {
        for (std::size_t i = 0; i < n; ++i) {
          if (rho[i] <= 0.0) continue;
          const double fp = double(f_prime(f2, m2, rho[i]));
          rho[i] *= std::exp(-dt * (kappa * fp + v2[i]));
        }
      }
      for (auto& r : rho) r = std::max(r, 0.0);
      t += dt;
    }
    t = t_end;
    Field snap(g, rho);
    DiagnosticsRow row;
    row.step = k;
    row.t = t_end;
    row.mass = mass(snap);
    row.linf = snap.max();
    row.tv = total_variation(snap);
    tr.diagnostics.rows.push_back(row);
    tr.full.push_back({k, t_end, std::move(snap), {}, {}});
  }
  return tr;
}

}  // namespace wfr::oracle
