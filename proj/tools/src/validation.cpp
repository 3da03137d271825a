#include "wfr/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "wfr/config.hpp"
#include "wfr/models.hpp"
#include "wfr/oracle.hpp"

namespace wfr {
namespace {

using Report = std::function<void(const CheckResult&)>;

class Table {
 public:
  explicit Table(const Report& report) : report_(report) {}

  void at_most(const std::string& name, double measured, double bound) { add(name, measured, bound, "<=", measured <= bound); }
  void below(const std::string& name, double measured, double bound) { add(name, measured, bound, "<", measured < bound); }

  std::vector<CheckResult> rows;

 private:
  void add(const std::string& name, double measured, double bound, const char* rel, bool pass) {
    CheckResult c{name, measured, bound, rel, pass && std::isfinite(measured)};
    if (report_) report_(c);
    rows.push_back(std::move(c));
  }
  const Report& report_;
};

Field unit_mass(Field f) {
  f *= 1.0 / mass(f);
  return f;
}

oracle::FTag tag(const Nonlinearity& f) {
  switch (f.kind()) {
    case Nonlinearity::Kind::Entropy:
      return oracle::FTag::Entropy;
    case Nonlinearity::Kind::Power:
      return oracle::FTag::Power;
    default:
      return oracle::FTag::Zero;
  }
}

// Runs a check body and turns an escaped exception into a failed row.
template <class Fn>
void guarded(Table& t, const std::string& name, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", name.c_str(), e.what());
    t.at_most(name + " (threw)", INFINITY, 0.0);
  }
}

void fr_checks(Table& t, const ValidationSettings& s, std::mt19937_64& rng) {
  guarded(t, "fr_distance constants", [&] {
    const Grid g = Grid::box(8, 8);
    const double e = std::max({std::abs(fr_distance(Field(g, 0.7), Field(g, 0.7))),
                               std::abs(fr_distance(Field(g, 1.0), Field(g, 0.0)) - 4.0),
                               std::abs(fr_distance(Field(g, 4.0), Field(g, 1.0)) - 4.0)});
    t.at_most("fr_distance constants |err|", e, 1e-12);
  });

  guarded(t, "fr_distance metric axioms", [&] {
    const Grid g = Grid::line(32);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    auto random_field = [&] {
      Field f(g);
      for (auto& v : f.values()) v = u(rng);
      return f;
    };
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Field a = random_field(), b = random_field(), c = random_field();
      worst = std::max(worst, std::abs(fr_distance(a, b) - fr_distance(b, a)));
      const double lhs = std::sqrt(fr_distance(a, c));
      const double rhs = std::sqrt(fr_distance(a, b)) + std::sqrt(fr_distance(b, c));
      worst = std::max(worst, lhs - rhs);
    }
    t.at_most("fr_distance symmetry/triangle violation", worst, 1e-8);
  });

  guarded(t, "fr step", [&] {
    const double h = 0.02;
    const std::size_t n = 1000;
    const Grid g = Grid::line(int(n));
    std::uniform_real_distribution<double> mu_dist(0.0, 2.0), u_dist(-20.0, 20.0), k_dist(0.0, 3.0);
    struct Case {
      Nonlinearity f;
      bool random_u;
      bool random_kappa;
    };
    const Case cases[] = {{Nonlinearity::zero(), true, false},
                          {Nonlinearity::power(2.0), false, false},
                          {Nonlinearity::power(3.0), true, false},
                          {Nonlinearity::power(10.0), true, true},
                          {Nonlinearity::power(100.0), true, true}};
    double residual = 0.0, agreement = 0.0;
    int outside = 0;
    for (const auto& cs : cases) {
      Field mu(g), u(g), kappa(g, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        mu[i] = i % 97 == 0 ? 0.0 : mu_dist(rng);
        if (cs.random_u) u[i] = u_dist(rng);
        if (cs.random_kappa) kappa[i] = k_dist(rng);
      }
      const ReactionSpec spec(cs.f, u, cs.random_kappa ? std::optional<Field>(kappa) : std::nullopt);
      const FrStepResult res = fisher_rao_step(mu, spec, h, s.frstep);
      const SandwichBounds b = sandwich_bounds(mu, spec, h);
      for (std::size_t i = 0; i < n; ++i) {
        const double out = res.density[i];
        if (mu[i] == 0.0) {
          if (out != 0.0) ++outside;
          continue;
        }
        residual = std::max(residual, fr_residual(out, mu[i], h, cs.f, u[i], kappa[i]));
        oracle::ScalarObjective obj;
        obj.kind = oracle::ScalarObjective::Kind::FisherRao;
        obj.f = tag(cs.f);
        obj.m = cs.f.exponent();
        obj.h = h;
        obj.mu = mu[i];
        obj.u = u[i];
        obj.kappa = kappa[i];
        const double ref = oracle::brute_force_pointwise(obj, 0.0, 4.0 * mu[i] + 1.0);
        agreement = std::max(agreement, std::abs(out - ref) / (1.0 + mu[i]));
        const double ratio = out / mu[i];
        if (ratio < b.lower * (1.0 - 1e-12) || ratio > b.upper * (1.0 + 1e-12)) ++outside;
      }
    }
    t.at_most("fr_step optimality residual (5 specs x 1000 cells)", residual, 1e-10);
    t.at_most("fr_step vs brute force |diff|/(1+mu)", agreement, 1e-9);
    t.at_most("fr_step sandwich / support violations", outside, 0.0);
  });

  guarded(t, "hele-shaw cap", [&] {
    const Grid g = Grid::line(500);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    double worst = -1.0;
    for (double m : {10.0, 100.0}) {
      Field mu(g);
      for (auto& v : mu.values()) v = d(rng);
      mu[0] = 1.0;
      const FrStepResult res = fisher_rao_step(mu, ReactionSpec::hele_shaw(g, m), 0.005, s.frstep);
      worst = std::max(worst, res.density.max() - 1.0);
    }
    t.at_most("hele-shaw FR step max(out) - 1 (m = 10, 100)", worst, 0.0);
  });

  guarded(t, "nutrient c step", [&] {
    const Grid g = Grid::line(64);
    const double h = 0.02;
    const double e = std::abs(fr_step_nutrient_c(Field(g, 1.0), Field(g, 1.0), h)[0] - 1.0 / (1.01 * 1.01));
    t.at_most("nutrient c closed form |err|", e, 1e-14);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    Field c(g), r(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      c[i] = 2.0 * d(rng);
      r[i] = d(rng);
    }
    const Field out = fr_step_nutrient_c(c, r, h);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      worst = std::max({worst, out[i] - c[i], (1.0 - h) * c[i] - out[i]});
    t.at_most("nutrient c sandwich violation", worst, 0.0);
  });
}

void prox_checks(Table& t, std::mt19937_64& rng) {
  guarded(t, "prox", [&] {
    std::uniform_real_distribution<double> z_dist(-1.0, 5.0), tau_dist(0.01, 2.0), v_dist(-2.0, 2.0);
    const Nonlinearity fs[] = {Nonlinearity::zero(), Nonlinearity::entropy(), Nonlinearity::power(2.0),
                               Nonlinearity::power(5.0)};
    double worst = 0.0, mono = 0.0;
    for (const auto& f : fs) {
      for (int k = 0; k < 200; ++k) {
        const double z = z_dist(rng), tau = tau_dist(rng), v = v_dist(rng);
        const double p = prox_internal(f, tau, z, v);
        oracle::ScalarObjective obj;
        obj.f = tag(f);
        obj.m = f.exponent();
        obj.tau = tau;
        obj.z = z;
        obj.v = v;
        const double ref = oracle::brute_force_pointwise(obj, 0.0, std::abs(z) + tau * std::abs(v) + 10.0);
        worst = std::max(worst, std::abs(p - ref) / (1.0 + std::abs(z)));
        const double z2 = z + std::abs(z_dist(rng));
        const double p2 = prox_internal(f, tau, z2, v);
        // monotone and nonexpansive in z
        mono = std::max({mono, p - p2, (p2 - p) - (z2 - z)});
      }
    }
    t.at_most("prox_internal vs brute force |diff|/(1+|z|)", worst, 1e-9);
    t.at_most("prox_internal monotone/nonexpansive violation", mono, 1e-12);
  });
}

void w2_checks(Table& t, const ValidationSettings& s, bool full) {
  guarded(t, "w2 oracle", [&] {
    const Grid g = Grid::line(64);
    const double dx = g.spacing(0);
    Field a(g), b(g);
    a[19] = 1.0 / dx;  // centres 0.3046875 and 0.6953125
    b[44] = 1.0 / dx;
    t.at_most("w2_exact spikes |W2 - 0.16|", std::abs(oracle::w2_exact_1d(a, b) - 0.16), 2.0 * dx);
    const Field lo = make_initial(g, "disk:0.25,0.25,2"), hi = make_initial(g, "disk:0.75,0.25,2");
    t.at_most("w2_exact half-uniforms |W2 - 0.25|", std::abs(oracle::w2_exact_1d(lo, hi) - 0.25), 1e-10);
  });

  const char* pairs[5][2] = {{"bump:0.3,0.08,1", "bump:0.7,0.08,1"},
                             {"disk:0.25,0.25,1", "disk:0.75,0.25,1"},
                             {"bump:0.5,0.1,1", "uniform:1"},
                             {"bump:0.25,0.07,1+bump:0.75,0.07,1", "bump:0.5,0.1,1"},
                             {"uniform:0.2+bump:0.2,0.15,1", "uniform:0.2+bump:0.8,0.15,1"}};
  const int count = full ? 5 : 1;
  for (int p = 0; p < count; ++p) {
    const std::string name = std::string("dynamic_w2 rel. error, ") + pairs[p][0] + " -> " + pairs[p][1];
    guarded(t, name, [&] {
      const Grid g = Grid::line(64);
      const Field a = unit_mass(make_initial(g, pairs[p][0]));
      const Field b = unit_mass(make_initial(g, pairs[p][1]));
      WStepConfig c = s.wstep;
      c.n_t = 16;
      const double dyn = dynamic_w2(a, b, c).value;
      const double ex = oracle::w2_exact_1d(a, b);
      t.at_most(name, std::abs(dyn - ex) / ex, 0.02);
    });
  }
}

void wstep_checks(Table& t, const ValidationSettings& s) {
  guarded(t, "wstep", [&] {
    const Grid g = Grid::line(64);
    const Field bump = make_initial(g, "uniform:0.05+bump:0.5,0.05,2");
    const EnergySpec heat = EnergySpec::diffusion(Nonlinearity::entropy(), Field(g));
    const auto res = wasserstein_jko_step(bump, heat, 0.01, s.wstep);
    t.at_most("wstep mass drift (relative)", std::abs(mass(res.density) / mass(bump) - 1.0), 1e-8);
    t.at_most("wstep Otto max principle max(out) - max(in)", res.density.max() - bump.max(), 1e-4);
    const double before = energy_value(heat, bump);
    const double after = 0.5 * oracle::w2_exact_1d(res.density, bump) / 0.01 + res.report.energy_after;
    t.at_most("wstep JKO objective vs trivial competitor", after - before, 1e-4);
    const Field flat(g, 1.3);
    const auto fixed = wasserstein_jko_step(flat, heat, 0.01, s.wstep);
    t.at_most("wstep uniform fixed point L1", l1_distance(fixed.density, flat), 1e-6);
  });
}

ModelConfig scalar_config(const Grid& g, const ValidationSettings& s, double h, double T) {
  ModelConfig cfg;
  cfg.family = Family::Scalar;
  cfg.grid = g;
  cfg.h = h;
  cfg.T = T;
  cfg.wstep = s.wstep;
  cfg.frstep = s.frstep;
  return cfg;
}

void model_checks(Table& t, const ValidationSettings& s, bool full) {
  guarded(t, "mass recursion", [&] {
    const double lambda = 2.0;
    ModelConfig cfg = scalar_config(Grid::line(32), s, 0.01, 0.1);
    cfg.potential2 = "constant:2";
    cfg.init = "uniform:1.5";
    const Trajectory tr = run_model(cfg);
    const double m0 = tr.diagnostics.rows.front().mass;
    double worst = 0.0;
    for (const auto& r : tr.diagnostics.rows) {
      const double expect = m0 / std::pow(1.0 + cfg.h * lambda / 2.0, 2.0 * r.step);
      worst = std::max(worst, std::abs(r.mass / expect - 1.0));
    }
    t.at_most("scalar mass recursion m0/(1+h lambda/2)^(2k) rel. err", worst, 1e-8);
  });

  guarded(t, "fd heat kernel", [&] {
    const Grid g = Grid::line(256);
    ModelConfig cfg = scalar_config(g, s, 0.05, 0.05);
    const double x0 = 0.5, s0 = 0.05, T = 0.05;
    const Field rho0 = make_initial(g, "bump:0.5,0.05,1");
    const Trajectory fd = oracle::fd_reference_scalar(cfg, rho0);
    // Neumann heat kernel on [0, 1] by images
    const double var = s0 * s0 + 2.0 * T;
    const double amp = s0 / std::sqrt(var);
    Field exact = Field::from_function(g, [&](const std::array<double, 2>& x) {
      double v = 0.0;
      for (int k = -4; k <= 4; ++k)
        for (double c : {2.0 * k + x0, 2.0 * k - x0}) v += std::exp(-(x[0] - c) * (x[0] - c) / (2.0 * var));
      return amp * v;
    });
    t.at_most("fd_reference heat vs exact kernel L1", l1_distance(fd.full.back().rho, exact), 1e-3);
  });

  if (!full) return;

  guarded(t, "scalar vs fd", [&] {
    const Grid g = Grid::line(128);
    double err[2] = {0.0, 0.0};
    double m0 = 0.0;
    for (int k = 0; k < 2; ++k) {
      ModelConfig cfg = scalar_config(g, s, 0.0025 / (1 << k), 0.05);
      cfg.init = "uniform:0.1+bump:0.5,0.08,1";
      const Field rho0 = make_initial(g, cfg.init);
      m0 = mass(rho0);
      const Trajectory a = run_model(cfg);
      const Trajectory b = oracle::fd_reference_scalar(cfg, rho0);
      err[k] = l1_distance(a.full.back().rho, b.full.back().rho);
    }
    t.at_most("scalar driver vs fd_reference L1 / mass (h = 0.0025)", err[0] / m0, 5e-2);
    t.below("scalar driver vs fd_reference L1 at h/2 vs h", err[1], err[0]);
  });

  guarded(t, "square distance sum", [&] {
    const Grid g = Grid::line(64);
    double sum[2] = {0.0, 0.0};
    for (int k = 0; k < 2; ++k) {
      ModelConfig cfg = scalar_config(g, s, 0.01 / (1 << k), 0.1);
      cfg.diffusion = Nonlinearity::power(2.0);
      cfg.reaction = Nonlinearity::power(2.0);
      cfg.init = "uniform:0.2+bump:0.4,0.08,1";
      const Trajectory tr = run_model(cfg);
      for (const auto& r : tr.diagnostics.rows) sum[k] += (r.w2_sq + r.fr_sq) / cfg.h;
    }
    t.below("sum (W2^2 + FR^2)/h ratio between h and h/2", std::max(sum[0], sum[1]) / std::min(sum[0], sum[1]), 2.0);
  });

  guarded(t, "hele-shaw 1D", [&] {
    for (double m : {10.0, 100.0}) {
      ModelConfig cfg;
      cfg.family = Family::HeleShaw;
      cfg.grid = Grid::line(64, 4.0, -2.0);
      cfg.h = 0.005;
      cfg.T = 0.3;
      cfg.m = m;
      cfg.wstep = s.wstep;
      cfg.frstep = s.frstep;
      cfg.init = "disk:0,1,0.8";
      const Trajectory tr = run_model(cfg);
      double top = 0.0;
      for (const auto& f : tr.full) top = std::max(top, f.rho.max());
      const std::string tag = " (m = " + std::to_string(int(m)) + ")";
      t.at_most("hele-shaw max rho" + tag, top, 1.0 + 1e-4);
      const double tv0 = tr.diagnostics.rows.front().tv;
      t.at_most("hele-shaw TV(T) / (e^T TV(0))" + tag, tr.diagnostics.rows.back().tv / (std::exp(cfg.T) * tv0), 1.1);
    }
  });

  guarded(t, "nutrient 1D", [&] {
    ModelConfig cfg;
    cfg.family = Family::Nutrient;
    cfg.grid = Grid::line(64, 4.0, -2.0);
    cfg.h = 0.005;
    cfg.T = 0.1;
    cfg.m = 20.0;
    cfg.wstep = s.wstep;
    cfg.frstep = s.frstep;
    cfg.init = "disk:0,0.8,0.9";
    cfg.init_second = "uniform:0.2+bump:1,0.3,1";
    const Trajectory tr = run_model(cfg);
    double top = 0.0, rise = -INFINITY;
    for (const auto& r : tr.diagnostics.rows) {
      top = std::max(top, r.linf);
      if (r.step > 0) rise = std::max(rise, r.linf_second_half - r.linf_second_before);
    }
    t.at_most("nutrient max rho", top, 1.0 + 1e-4);
    t.at_most("nutrient W step max c increase", rise, 1e-4);
  });
}

}  // namespace

void apply_override(ValidationSettings& s, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  auto as_int = [&] {
    const double v = parse_double(value, key);
    if (v != std::floor(v) || v < 1) throw ConfigError(key + " must be a positive integer");
    return int(v);
  };
  if (key == "wstep.tol") s.wstep.tol = parse_double(value, key);
  else if (key == "wstep.max_iter") s.wstep.max_iter = as_int();
  else if (key == "wstep.n_t") s.wstep.n_t = as_int();
  else if (key == "wstep.r_admm") s.wstep.r_admm = parse_double(value, key);
  else if (key == "frstep.tol") s.frstep.tol = parse_double(value, key);
  else if (key == "frstep.max_newton") s.frstep.max_newton = as_int();
  else if (key == "seed") s.seed = static_cast<unsigned long long>(as_int());
  else throw ConfigError("unknown validation override '" + key + "'");
}

std::vector<CheckResult> run_validation(ValidationLevel level, const ValidationSettings& settings,
                                        const std::function<void(const CheckResult&)>& report) {
  const bool full = level == ValidationLevel::Full;
  Table t(report);
  std::mt19937_64 rng(settings.seed);
  fr_checks(t, settings, rng);
  prox_checks(t, rng);
  w2_checks(t, settings, full);
  wstep_checks(t, settings);
  model_checks(t, settings, full);
  return t.rows;
}

std::string format_check(const CheckResult& c) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s  %-58s measured %-12.4g %s %.4g", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.measured, c.relation.c_str(), c.bound);
  return buf;
}

}  // namespace wfr
