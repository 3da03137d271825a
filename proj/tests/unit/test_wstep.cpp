#include <doctest.h>

#include <cmath>

#include "wfr/config.hpp"
#include "wfr/oracle.hpp"
#include "wfr/wstep.hpp"

using namespace wfr;
using doctest::Approx;

namespace {

Field unit_mass(Field f) {
  f *= 1.0 / mass(f);
  return f;
}

}  // namespace

TEST_CASE("uniform density is a fixed point") {
  for (const Grid& g : {Grid::line(32), Grid::box(16, 16)}) {
    const Field flat(g, 0.8);
    for (const auto& f : {Nonlinearity::entropy(), Nonlinearity::power(2.0), Nonlinearity::power(5.0)}) {
      const auto res = wasserstein_jko_step(flat, EnergySpec::diffusion(f, Field(g)), 0.01);
      CHECK(res.report.converged);
      CHECK(l1_distance(res.density, flat) <= 1e-6);
    }
  }
}

TEST_CASE("narrow bump: mass and Otto maximum principle") {
  const Grid g = Grid::line(64);
  const Field bump = make_initial(g, "bump:0.5,0.03,1");
  const auto res = wasserstein_jko_step(bump, EnergySpec::diffusion(Nonlinearity::entropy(), Field(g)), 0.01);
  CHECK(std::abs(mass(res.density) / mass(bump) - 1.0) <= 1e-8);
  CHECK(res.density.max() <= bump.max() + 1e-4);
  CHECK(res.density.min() >= 0.0);
}

TEST_CASE("maximum principle with a potential") {
  const Grid g = Grid::line(64);
  const Field v = Field::from_function(g, [](const std::array<double, 2>& x) { return 2.0 * x[0]; });
  const Field rho = make_initial(g, "uniform:0.3+bump:0.4,0.1,0.5");
  for (const auto& f : {Nonlinearity::entropy(), Nonlinearity::power(2.0)}) {
    const auto res = wasserstein_jko_step(rho, EnergySpec::diffusion(f, v), 0.01);
    const double c = f.derivative(rho.max()) + v.max();
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(res.density[i] <= f.derivative_inverse(c - v[i]) + 1e-4);
  }
}

TEST_CASE("JKO objective beats the trivial competitor") {
  const Grid g = Grid::line(64);
  const double h = 0.01;
  const Field v = Field::from_function(g, [](const std::array<double, 2>& x) { return (x[0] - 0.3) * (x[0] - 0.3); });
  const Field rho = make_initial(g, "uniform:0.2+bump:0.7,0.08,1");
  for (const auto& f : {Nonlinearity::entropy(), Nonlinearity::power(3.0)}) {
    const EnergySpec e = EnergySpec::diffusion(f, v);
    const auto res = wasserstein_jko_step(rho, e, h);
    const double objective = oracle::w2_exact_1d(res.density, rho) / (2.0 * h) + energy_value(e, res.density);
    CHECK(objective <= energy_value(e, rho) + 1e-6);
    CHECK(res.report.energy_after == Approx(energy_value(e, res.density)));
  }
}

TEST_CASE("wstep errors and flags") {
  const Grid g = Grid::line(16);
  const EnergySpec heat = EnergySpec::diffusion(Nonlinearity::entropy(), Field(g));
  CHECK_THROWS_AS(wasserstein_jko_step(Field(g), heat, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(wasserstein_jko_step(Field(g, 1.0), EnergySpec::reaction(Nonlinearity::zero(), Field(g)), 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(wasserstein_jko_step(Field(g, 1.0), heat, 0.0), std::invalid_argument);
  WStepConfig short_run;
  short_run.max_iter = 3;
  const Field bump = make_initial(g, "uniform:0.1+bump:0.5,0.1,1");
  const auto res = wasserstein_jko_step(bump, heat, 0.01, short_run);
  CHECK_FALSE(res.report.converged);
  CHECK(res.report.iterations == 3);
  CHECK(mass(res.density) == Approx(mass(bump)).epsilon(1e-12));
}

TEST_CASE("conjugate gradient and spectral solves agree") {
  const Grid g = Grid::box(12, 10, 1.2, 1.0);
  const Field rho = make_initial(g, "uniform:0.2+bump:0.5;0.4,0.15,1");
  const EnergySpec e = EnergySpec::diffusion(Nonlinearity::power(2.0), Field(g));
  WStepConfig spectral, cg;
  cg.linear_solver = LinearSolverKind::ConjugateGradient;
  const auto a = wasserstein_jko_step(rho, e, 0.02, spectral);
  const auto b = wasserstein_jko_step(rho, e, 0.02, cg);
  CHECK(a.report.converged);
  CHECK(b.report.converged);
  CHECK(l1_distance(a.density, b.density) <= 1e-5);
  CHECK(b.report.cg_iterations > 0);
}

TEST_CASE("warm start reproduces the cold solution") {
  const Grid g = Grid::line(48);
  const EnergySpec e = EnergySpec::diffusion(Nonlinearity::entropy(), Field(g));
  const Field rho = make_initial(g, "uniform:0.2+bump:0.3,0.08,1");
  WStepConfig tight;
  tight.tol = 1e-8;
  tight.max_iter = 200000;
  SpaceTimeStaggered warm;
  const auto first = wasserstein_jko_step(rho, e, 0.01, tight, &warm);
  CHECK(warm.n_t == 8);
  const auto cold = wasserstein_jko_step(first.density, e, 0.01, tight);
  const auto hot = wasserstein_jko_step(first.density, e, 0.01, tight, &warm);
  MESSAGE("iterations cold ", cold.report.iterations, " warm ", hot.report.iterations);
  CHECK(hot.report.converged);
  CHECK(l1_distance(cold.density, hot.density) <= 1e-5);
}

TEST_CASE("dynamic_w2") {
  const Grid g = Grid::line(64);
  WStepConfig cfg;
  cfg.n_t = 16;
  cfg.max_iter = 20000;
  const Field a = unit_mass(make_initial(g, "bump:0.3,0.08,1"));
  const Field b = unit_mass(make_initial(g, "bump:0.7,0.08,1"));
  CHECK(dynamic_w2(a, a, cfg).value <= 1e-6);

  const double ab = dynamic_w2(a, b, cfg).value;
  const double ba = dynamic_w2(b, a, cfg).value;
  CHECK(std::abs(ab - oracle::w2_exact_1d(a, b)) <= 0.02 * oracle::w2_exact_1d(a, b));
  CHECK(std::abs(ab - ba) <= 1e-3 * ab);

  const double dx = g.spacing(0);
  Field s0(g), s1(g);
  s0[19] = 1.0 / dx;
  s1[44] = 1.0 / dx;
  CHECK(std::abs(dynamic_w2(s0, s1, cfg).value - 0.16) <= 0.16 * 0.05);

  const Field lo = unit_mass(make_initial(g, "disk:0.25,0.25,1"));
  const Field hi = unit_mass(make_initial(g, "disk:0.75,0.25,1"));
  CHECK(dynamic_w2(lo, hi, cfg).value == Approx(oracle::w2_exact_1d(lo, hi)).epsilon(0.02));

  CHECK_THROWS_AS(dynamic_w2(a, 2.0 * b, cfg), std::invalid_argument);
}
