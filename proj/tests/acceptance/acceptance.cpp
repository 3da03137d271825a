// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wfr/config.hpp"
#include "wfr/frstep.hpp"
#include "wfr/models.hpp"
#include "wfr/oracle.hpp"
#include "wfr/wstep.hpp"

using namespace wfr;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(const std::string& id, bool pass, const std::string& detail) {
  std::printf("%s  %-4s %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
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

Field unit_mass(Field f) {
  f *= 1.0 / mass(f);
  return f;
}

ModelConfig from_file(const char* name) {
  return load_model_config(KeyValueConfig::load(std::string(WFR_CONFIG_DIR) + "/" + name));
}

// Every driver run is kept so that the invariants of criteria 3 to 5 are
// checked across the whole matrix.
struct Run {
  std::string label;
  ModelConfig cfg;
  Trajectory tr;
};
std::deque<Run> matrix;  // references handed out by record() stay valid

const Trajectory& record(const std::string& label, const ModelConfig& cfg) {
  std::printf("      running %s ...\n", label.c_str());
  std::fflush(stdout);
  const auto t0 = Clock::now();
  matrix.push_back({label, cfg, run_model(cfg)});
  std::printf("      %s: %d steps in %.1f s%s\n", label.c_str(), cfg.steps(), seconds_since(t0),
              matrix.back().tr.converged ? "" : " (some W steps not converged)");
  return matrix.back().tr;
}

ModelConfig scalar(const Grid& g, double h, double T) {
  ModelConfig cfg;
  cfg.family = Family::Scalar;
  cfg.grid = g;
  cfg.h = h;
  cfg.T = T;
  return cfg;
}

void criterion1() {
  const auto t0 = Clock::now();
  const Grid g = Grid::box(8, 8);
  double constants = std::max({std::abs(fr_distance(Field(g, 0.7), Field(g, 0.7))),
                               std::abs(fr_distance(Field(g, 1.0), Field(g, 0.0)) - 4.0),
                               std::abs(fr_distance(Field(g, 4.0), Field(g, 1.0)) - 4.0)});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  const Grid line = Grid::line(40);
  auto random_field = [&] {
    Field f(line);
    for (auto& v : f.values()) v = u(rng);
    return f;
  };
  double axioms = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Field a = random_field(), b = random_field(), c = random_field();
    axioms = std::max(axioms, std::abs(fr_distance(a, b) - fr_distance(b, a)));
    axioms = std::max(axioms, std::sqrt(fr_distance(a, c)) - std::sqrt(fr_distance(a, b)) - std::sqrt(fr_distance(b, c)));
  }
  const double t = seconds_since(t0);
  verdict("1", constants <= 1e-12 && axioms <= 1e-8 && t < 1.0,
          fmt("FR closed form: constants err %.2e <= 1e-12, axiom violation %.2e <= 1e-8, %.3f s < 1 s", constants,
              axioms, t));
}

void criterion2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  const double h = 0.02;
  const Grid g = Grid::line(1000);
  std::uniform_real_distribution<double> mu_dist(0.0, 2.0), u_dist(-20.0, 20.0), k_dist(0.0, 3.0);
  const Nonlinearity fs[] = {Nonlinearity::zero(), Nonlinearity::power(2.0), Nonlinearity::power(3.0),
                             Nonlinearity::power(10.0), Nonlinearity::power(100.0)};
  double residual = 0.0, agreement = 0.0;
  for (const auto& f : fs) {
    Field mu(g), u(g), kappa(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      mu[i] = mu_dist(rng);
      u[i] = u_dist(rng);
      kappa[i] = k_dist(rng);
    }
    const FrStepResult res = fisher_rao_step(mu, ReactionSpec(f, u, kappa), h);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (mu[i] == 0.0) continue;
      const double out = res.density[i];
      // r (r - sqrt(mu)) + h/2 r^2 (kappa F'(r^2) + U) = 0 with r = sqrt(out)
      const long double r = std::sqrt((long double)out);
      const long double fp = f.kind() == Nonlinearity::Kind::Power
                                 ? f.exponent() / (f.exponent() - 1) * std::pow((long double)out, f.exponent() - 1)
                                 : 0.0L;
      const long double g_r = r * (r - std::sqrt((long double)mu[i])) + h / 2 * out * (kappa[i] * fp + u[i]);
      residual = std::max(residual, double(std::abs(g_r)) / (1.0 + mu[i]));
      oracle::ScalarObjective obj;
      obj.kind = oracle::ScalarObjective::Kind::FisherRao;
      obj.f = tag(f);
      obj.m = f.exponent();
      obj.h = h;
      obj.mu = mu[i];
      obj.u = u[i];
      obj.kappa = kappa[i];
      agreement = std::max(agreement, std::abs(out - oracle::brute_force_pointwise(obj, 0.0, 4.0 * mu[i] + 1.0)));
    }
  }
  const double t = seconds_since(t0);
  verdict("2", residual <= 1e-10 && agreement <= 1e-9 && t < 10.0,
          fmt("FR step optimality: residual/(1+mu) %.2e <= 1e-10, brute force |diff| %.2e <= 1e-9, %.2f s < 10 s",
              residual, agreement, t));
}

void criterion6() {
  const auto t0 = Clock::now();
  const char* pairs[5][2] = {{"bump:0.3,0.08,1", "bump:0.7,0.08,1"},
                             {"disk:0.25,0.25,1", "disk:0.75,0.25,1"},
                             {"bump:0.5,0.1,1", "uniform:1"},
                             {"bump:0.25,0.07,1+bump:0.75,0.07,1", "bump:0.5,0.1,1"},
                             {"uniform:0.2+bump:0.2,0.15,1", "uniform:0.2+bump:0.8,0.15,1"}};
  const Grid g = Grid::line(64);
  WStepConfig cfg;
  cfg.n_t = 16;
  cfg.max_iter = 20000;
  double worst = 0.0;
  for (const auto& p : pairs) {
    const Field a = unit_mass(make_initial(g, p[0])), b = unit_mass(make_initial(g, p[1]));
    const double exact = oracle::w2_exact_1d(a, b);
    worst = std::max(worst, std::abs(dynamic_w2(a, b, cfg).value - exact) / exact);
  }
  const double t = seconds_since(t0);
  verdict("6", worst <= 0.02 && t < 120.0,
          fmt("ALG2 vs exact W2 on 5 pairs: max rel. error %.4f <= 0.02, %.1f s < 120 s", worst, t));
}

void criterion7() {
  const auto t0 = Clock::now();
  const Grid g = Grid::line(128);
  double err[2] = {0.0, 0.0}, m0 = 0.0;
  for (int k = 0; k < 2; ++k) {
    ModelConfig cfg = scalar(g, 0.0025 / (1 << k), 0.05);
    cfg.init = "uniform:0.1+bump:0.5,0.08,1";
    const Field rho0 = make_initial(g, cfg.init);
    m0 = mass(rho0);
    const Trajectory& a = record(fmt("heat 1D h=%g", cfg.h), cfg);
    const Trajectory b = oracle::fd_reference_scalar(cfg, rho0, {true, false, false});
    err[k] = l1_distance(a.full.back().rho, b.full.back().rho);
  }
  const double t = seconds_since(t0);
  verdict("7", err[0] <= 5e-2 * m0 && err[1] < err[0] && t < 300.0,
          fmt("scalar vs finite differences: L1/mass %.2e <= 5e-2, halved h %.2e < %.2e, %.1f s < 300 s", err[0] / m0,
              err[1], err[0], t));
}

void criterion8() {
  const auto t0 = Clock::now();
  const double lambda = 2.0;
  ModelConfig cfg = scalar(Grid::box(32, 32), 0.01, 0.2);
  cfg.potential2 = "constant:2";
  cfg.init = "uniform:0.7";
  const Trajectory& tr = record("mass recursion 2D", cfg);
  const double m0 = tr.diagnostics.rows.front().mass;
  double worst = 0.0;
  for (const auto& r : tr.diagnostics.rows)
    worst = std::max(worst, std::abs(r.mass * std::pow(1.0 + cfg.h * lambda / 2.0, 2.0 * r.step) / m0 - 1.0));
  const double t = seconds_since(t0);
  verdict("8", worst <= 1e-8 && t < 30.0,
          fmt("mass recursion: max rel. error %.2e <= 1e-8, %.1f s < 30 s", worst, t));
}

void criterion9() {
  const auto t0 = Clock::now();
  const ModelConfig cfg = from_file("prey_predator.conf");
  const Trajectory& tr = record("prey-predator 64x64", cfg);
  const auto& rows = tr.diagnostics.rows;
  const double c1 = 3.0 * cfg.A, c2 = 3.0 * (cfg.B - cfg.C);
  bool bounded = true;
  for (const auto& r : rows) {
    bounded = bounded && r.mass > 0.0 && r.mass <= std::exp(c1 * r.t) * rows.front().mass;
    bounded = bounded && r.mass_second > 0.0 && r.mass_second <= std::exp(c2 * r.t) * rows.front().mass_second;
  }
  auto sign = [](double x) { return (x > 0.0) - (x < 0.0); };
  int changes1 = 0, changes2 = 0, anti = 0, counted = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const int s1 = sign(rows[k].mass - rows[k - 1].mass), s2 = sign(rows[k].mass_second - rows[k - 1].mass_second);
    if (k > 1) {
      changes1 += s1 != sign(rows[k - 1].mass - rows[k - 2].mass);
      changes2 += s2 != sign(rows[k - 1].mass_second - rows[k - 2].mass_second);
    }
    anti += s1 == -s2 && s1 != 0;
    ++counted;
  }
  const double agreement = double(anti) / counted;
  const double t = seconds_since(t0);
  verdict("9", bounded && changes1 >= 2 && changes2 >= 2 && agreement >= 0.6 && t <= 1200.0,
          fmt("prey-predator: masses within (0, e^(C_i t) m_i(0)] %s, sign changes %d and %d >= 2, anti-phase %.2f >= "
              "0.60, %.0f s <= 1200 s",
              bounded ? "yes" : "no", changes1, changes2, agreement, t));
}

void criterion10() {
  const auto t0 = Clock::now();
  ModelConfig cfg = from_file("heleshaw.conf");
  cfg.output_every = 1;  // every step is needed to time the events
  const Trajectory& sharp = record("hele-shaw m=100 64x64", cfg);
  const double dilated = 1.1 * 1.5;  // initial disk radius 1.5 about the origin
  int saturation = -1, expansion = -1;
  for (const auto& f : sharp.full) {
    if (saturation < 0 && f.rho.max() >= 0.99) saturation = f.step;
    if (expansion < 0) {
      double outside = 0.0;
      for (std::size_t i = 0; i < f.rho.size(); ++i) {
        const auto x = cfg.grid.cell_center(i);
        if (std::hypot(x[0], x[1]) > dilated) outside += f.rho[i] * cfg.grid.cell_volume();
      }
      if (outside >= 0.01 * mass(f.rho)) expansion = f.step;
    }
  }
  const double comp_sharp = complementarity_residual(sharp.full.back().rho, cfg.m);
  cfg.m = 10.0;
  const Trajectory& soft = record("hele-shaw m=10 64x64", cfg);
  const double comp_soft = complementarity_residual(soft.full.back().rho, cfg.m);
  const double t = seconds_since(t0);
  verdict("10", saturation >= 0 && expansion >= 0 && saturation < expansion &&
                    comp_sharp < comp_soft && t <= 1800.0,
          fmt("hele-shaw: saturation step %d < expansion step %d, complementarity m=100 %.3e < m=10 %.3e, %.0f s "
              "<= 1800 s",
              saturation, expansion, comp_sharp, comp_soft, t));
}

void criterion11() {
  const auto t0 = Clock::now();
  double sum[2] = {0.0, 0.0};
  for (int k = 0; k < 2; ++k) {
    ModelConfig cfg = scalar(Grid::line(64), 0.01 / (1 << k), 0.1);
    cfg.diffusion = Nonlinearity::power(2.0);
    cfg.reaction = Nonlinearity::power(2.0);
    cfg.potential2 = "linear:-1";
    cfg.init = "uniform:0.2+bump:0.4,0.08,1";
    const Trajectory& tr = record(fmt("porous m1=m2=2 h=%g", cfg.h), cfg);
    for (const auto& r : tr.diagnostics.rows) sum[k] += (r.w2_sq + r.fr_sq) / cfg.h;
  }
  const double ratio = std::max(sum[0], sum[1]) / std::min(sum[0], sum[1]);
  verdict("11", ratio < 2.0,
          fmt("sum (W2^2 + FR^2)/h: %.4g at h, %.4g at h/2, ratio %.3f < 2, %.1f s", sum[0], sum[1], ratio,
              seconds_since(t0)));
}

// Extra runs so that the invariant checks see every driver and both
// dimensions.
void matrix_runs() {
  ModelConfig drift = scalar(Grid::box(24, 24, 2.0, 2.0, -1.0, -1.0), 0.01, 0.1);
  drift.diffusion = Nonlinearity::power(3.0);
  drift.potential1 = "quadratic-well";
  drift.reaction = Nonlinearity::power(2.0);
  drift.potential2 = "linear:-2";
  drift.init = "uniform:0.1+bump:0.3;0.2,0.3,1";
  record("scalar 2D drift + reaction", drift);

  ModelConfig heat = scalar(Grid::box(24, 24), 0.01, 0.1);
  heat.reaction = Nonlinearity::power(2.0);
  heat.potential2 = "constant:-3";
  heat.init = "uniform:0.2+bump:0.5;0.5,0.1,1";
  record("scalar 2D entropy growth", heat);

  for (double m : {10.0, 100.0}) {
    ModelConfig hs = from_file("heleshaw.conf");
    hs.grid = Grid::line(64, 4.0, -2.0);
    hs.init = "disk:0,1,0.8";
    hs.m = m;
    hs.T = 0.3;
    record(fmt("hele-shaw 1D m=%g", m), hs);
  }
  record("nutrient 1D", from_file("nutrient.conf"));
}

void invariants() {
  int violations = 0;
  double drift = 0.0, otto = -INFINITY, cap = -INFINITY, c_fr = -INFINITY, c_w = -INFINITY;
  double hs_ratio = 0.0, hs_bound = 0.0;
  bool hs_upper = true;
  for (const auto& run : matrix) {
    const bool potential_free = run.cfg.family == Family::Scalar && run.cfg.potential1 == "zero";
    const bool capped = run.cfg.family == Family::HeleShaw || run.cfg.family == Family::Nutrient;
    for (const auto& r : run.tr.diagnostics.rows) {
      if (r.step == 0) continue;
      violations += r.sandwich_violations;
      drift = std::max(drift, r.w_mass_drift);
      if (potential_free) otto = std::max(otto, r.linf_half - r.linf_before);
      if (capped) cap = std::max(cap, r.linf);
      if (run.cfg.family == Family::Nutrient) {
        c_fr = std::max(c_fr, r.linf_second - r.linf_second_half);
        c_w = std::max(c_w, r.linf_second_half - r.linf_second_before);
      }
      if (run.cfg.family == Family::HeleShaw) {
        hs_upper = hs_upper && r.fr_ratio_max <= 1.0 + run.cfg.h;
        if (r.fr_ratio_max - 1.0 - run.cfg.h > hs_ratio - hs_bound) {
          hs_ratio = r.fr_ratio_max;
          hs_bound = 1.0 + run.cfg.h;
        }
      }
    }
  }
  verdict("3a", violations == 0,
          fmt("sandwich [1 - c h, 1 + C h] over %zu driver runs: %d violations", matrix.size(), violations));
  verdict("3b", hs_upper,
          fmt("hele-shaw FR factor <= 1 + h: worst %.6f vs %.6f", hs_ratio, hs_bound));
  verdict("4", drift <= 1e-8, fmt("W step relative mass drift %.2e <= 1e-8 over all runs", drift));
  verdict("5", otto <= 1e-4 && cap <= 1.0 + 1e-4 && c_fr <= 1e-10 && c_w <= 1e-4,
          fmt("max principles: Otto %.2e <= 1e-4, hele-shaw/nutrient max rho %.6f <= 1 + 1e-4, nutrient c rise "
              "FR %.2e <= 1e-10, W %.2e <= 1e-4",
              otto, cap, c_fr, c_w));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const std::vector<std::function<void()>> steps = {criterion1, criterion2, criterion6, criterion7, criterion8,
                                                    criterion11, matrix_runs, criterion9, criterion10, invariants};
  for (const auto& s : steps) {
    try {
      s();
    } catch (const std::exception& e) {
      verdict("??", false, std::string("threw: ") + e.what());
    }
  }
  std::printf("%d failing criteria, %.0f s total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
