#include "wfr/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wfr {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Relative slack for comparing a computed ratio with a bound; rounding only.
constexpr double kRatioSlack = 1e-12;

struct WOutcome {
  Field half;
  WStepReport report;
  double drift = 0.0;
};

WOutcome w_half(const Field& rho, const EnergySpec& spec, double h, const WStepConfig& cfg,
                SpaceTimeStaggered& warm) {
  const double m0 = mass(rho);
  if (!(m0 > 0.0)) {
    // nothing to transport; an empty density is its own JKO step
    WOutcome out{rho, {}, 0.0};
    out.report.converged = true;
    out.report.energy_after = energy_value(spec, rho);
    return out;
  }
  auto res = wasserstein_jko_step(rho, spec, h, cfg, &warm);
  const double drift = std::abs(mass(res.density) / m0 - 1.0);
  return {std::move(res.density), res.report, drift};
}

void add_w(DiagnosticsRow& row, const WOutcome& w) {
  row.wstep_iters += w.report.iterations;
  row.converged = row.converged && w.report.converged;
  row.w2_sq += w.report.action;
  row.energy1 += w.report.energy_after;
  row.w_mass_drift = std::max(row.w_mass_drift, w.drift);
}

bool within(double ratio_min, double ratio_max, const SandwichBounds& b) {
  return ratio_min >= b.lower * (1.0 - kRatioSlack) && ratio_max <= b.upper * (1.0 + kRatioSlack);
}

// Records one FR step; `primary` selects the species reported in the ratio columns.
void add_fr(DiagnosticsRow& row, const FrStepResult& fr, const Field& in, const ReactionSpec& spec, double h,
            bool primary) {
  const SandwichBounds b = sandwich_bounds(in, spec, h);
  if (primary) {
    row.fr_ratio_min = fr.report.min_ratio;
    row.fr_ratio_max = fr.report.max_ratio;
    row.fr_lower = b.lower;
    row.fr_upper = b.upper;
  }
  if (fr.report.solved_cells > 0 && !within(fr.report.min_ratio, fr.report.max_ratio, b)) ++row.sandwich_violations;
  row.fr_residual = std::max(row.fr_residual, fr.report.max_residual);
  row.fr_sq += fr_distance(fr.density, in);
  row.energy2 += energy_value(spec.energy(), fr.density);
}

bool keep(const ModelConfig& cfg, int step) { return step % cfg.output_every == 0 || step == cfg.steps(); }

void finish_row(Trajectory& tr, DiagnosticsRow& row, const Field& rho, const StepObserver& obs) {
  row.mass = mass(rho);
  row.linf = rho.max();
  row.tv = total_variation(rho);
  tr.converged = tr.converged && row.converged;
  tr.diagnostics.rows.push_back(row);
  if (obs) obs(row);
}

DiagnosticsRow initial_row(const Field& rho, const std::optional<Field>& second) {
  DiagnosticsRow row;
  row.mass = mass(rho);
  row.linf = row.linf_before = row.linf_half = rho.max();
  row.tv = total_variation(rho);
  if (second) {
    row.mass_second = mass(*second);
    row.linf_second = row.linf_second_half = row.linf_second_before = second->max();
  }
  return row;
}

void require_density(const Field& f, const Grid& g, const char* what) {
  require_same_grid(f.grid(), g, what);
  for (double v : f.values())
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
}

Nonlinearity parse_nonlinearity(const KeyValueConfig& kv, const std::string& section, const std::string& fallback,
                                bool allow_entropy) {
  const std::string tag = kv.get_string(section + ".nonlinearity", fallback);
  if (tag == "zero") return Nonlinearity::zero();
  if (tag == "entropy") {
    if (!allow_entropy) throw ConfigError(section + ".nonlinearity: entropy is not allowed on the reaction side");
    return Nonlinearity::entropy();
  }
  if (tag == "power") {
    const double m = kv.get_double(section + ".m");
    if (!(m > 1.0)) throw ConfigError(section + ".m must be > 1");
    return Nonlinearity::power(m);
  }
  throw ConfigError(section + ".nonlinearity: unknown tag '" + tag + "'");
}

std::string nonlinearity_tag(const Nonlinearity& f) {
  switch (f.kind()) {
    case Nonlinearity::Kind::Zero:
      return "zero";
    case Nonlinearity::Kind::Entropy:
      return "entropy";
    case Nonlinearity::Kind::Power:
      return "power";
  }
  return "zero";
}

Family parse_family(const std::string& s) {
  if (s == "scalar") return Family::Scalar;
  if (s == "prey-predator" || s == "system") return Family::PreyPredator;
  if (s == "heleshaw") return Family::HeleShaw;
  if (s == "nutrient") return Family::Nutrient;
  throw ConfigError("unknown family '" + s + "'");
}

double max_negative(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s = std::max(s, -v);
  return s;
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::Scalar:
      return "scalar";
    case Family::PreyPredator:
      return "prey-predator";
    case Family::HeleShaw:
      return "heleshaw";
    case Family::Nutrient:
      return "nutrient";
  }
  return "scalar";
}

int ModelConfig::steps() const { return int(std::floor(T / h + 1e-9)); }

void ModelConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("h must be > 0");
  if (!(T >= h) || !std::isfinite(T)) throw ConfigError("T must be >= h");
  if (output_every < 1) throw ConfigError("output.every must be >= 1");
  if (pgm_max && !(*pgm_max > 0.0)) throw ConfigError("output.pgm_max must be > 0");
  if (wstep.n_t < 4 || wstep.n_t > 32) throw ConfigError("wstep.n_t must be in [4, 32]");
  if (!(wstep.tol > 0.0)) throw ConfigError("wstep.tol must be > 0");
  if (wstep.max_iter < 1) throw ConfigError("wstep.max_iter must be >= 1");
  if (!(wstep.r_admm > 0.0)) throw ConfigError("wstep.r_admm must be > 0");
  if (!(frstep.tol > 0.0)) throw ConfigError("frstep.tol must be > 0");
  if (frstep.max_newton < 0) throw ConfigError("frstep.max_newton must be >= 0");
  if ((family == Family::HeleShaw || family == Family::Nutrient) && !(m > 2.0))
    throw ConfigError(family_name(family) + ".m must be > 2");
  if (family == Family::PreyPredator && (A < 0.0 || B < 0.0 || C < 0.0))
    throw ConfigError("system.A, system.B, system.C must be >= 0");
  if (family == Family::Nutrient && (c1 < 0.0 || c2 < 0.0)) throw ConfigError("nutrient.c1, nutrient.c2 must be >= 0");
  if (family == Family::Scalar && !(reaction_weight >= 0.0)) throw ConfigError("reaction.weight must be >= 0");
  if (family == Family::Scalar && diffusion.kind() == Nonlinearity::Kind::Zero)
    throw ConfigError("diffusion.nonlinearity must be entropy or power");
  if ((family == Family::PreyPredator || family == Family::Nutrient) && init_second.empty())
    throw ConfigError(family == Family::PreyPredator ? "missing key 'init.predator'" : "missing key 'init.nutrient'");
}

std::vector<std::pair<std::string, std::string>> ModelConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("family", family_name(family));
  e.emplace_back("grid.dim", std::to_string(grid.dim()));
  e.emplace_back("grid.n0", std::to_string(grid.extent(0)));
  e.emplace_back("grid.length0", short_fmt(grid.length(0)));
  e.emplace_back("grid.origin0", short_fmt(grid.origin(0)));
  if (grid.dim() == 2) {
    e.emplace_back("grid.n1", std::to_string(grid.extent(1)));
    e.emplace_back("grid.length1", short_fmt(grid.length(1)));
    e.emplace_back("grid.origin1", short_fmt(grid.origin(1)));
  }
  e.emplace_back("h", short_fmt(h));
  e.emplace_back("T", short_fmt(T));
  e.emplace_back("seed", std::to_string(seed));
  e.emplace_back("output.every", std::to_string(output_every));
  e.emplace_back("output.pgm_max", pgm_max ? short_fmt(*pgm_max) : "auto");
  e.emplace_back("wstep.tol", short_fmt(wstep.tol));
  e.emplace_back("wstep.max_iter", std::to_string(wstep.max_iter));
  e.emplace_back("wstep.n_t", std::to_string(wstep.n_t));
  e.emplace_back("wstep.r_admm", short_fmt(wstep.r_admm));
  e.emplace_back("wstep.solver", wstep.linear_solver == LinearSolverKind::Spectral ? "spectral" : "cg");
  e.emplace_back("frstep.tol", short_fmt(frstep.tol));
  e.emplace_back("frstep.max_newton", std::to_string(frstep.max_newton));
  switch (family) {
    case Family::Scalar:
      e.emplace_back("diffusion.nonlinearity", nonlinearity_tag(diffusion));
      if (diffusion.kind() == Nonlinearity::Kind::Power) e.emplace_back("diffusion.m", short_fmt(diffusion.exponent()));
      e.emplace_back("diffusion.potential", potential1);
      e.emplace_back("reaction.nonlinearity", nonlinearity_tag(reaction));
      if (reaction.kind() == Nonlinearity::Kind::Power) e.emplace_back("reaction.m", short_fmt(reaction.exponent()));
      e.emplace_back("reaction.potential", potential2);
      e.emplace_back("reaction.weight", short_fmt(reaction_weight));
      break;
    case Family::PreyPredator:
      e.emplace_back("system.A", short_fmt(A));
      e.emplace_back("system.B", short_fmt(B));
      e.emplace_back("system.C", short_fmt(C));
      e.emplace_back("system.s11", short_fmt(kernel_signs[0]));
      e.emplace_back("system.s12", short_fmt(kernel_signs[1]));
      e.emplace_back("system.s21", short_fmt(kernel_signs[2]));
      e.emplace_back("system.s22", short_fmt(kernel_signs[3]));
      break;
    case Family::HeleShaw:
      e.emplace_back("heleshaw.m", short_fmt(m));
      break;
    case Family::Nutrient:
      e.emplace_back("nutrient.m", short_fmt(m));
      e.emplace_back("nutrient.c1", short_fmt(c1));
      e.emplace_back("nutrient.c2", short_fmt(c2));
      break;
  }
  e.emplace_back("init", init);
  if (family == Family::PreyPredator) e.emplace_back("init.predator", init_second);
  if (family == Family::Nutrient) e.emplace_back("init.nutrient", init_second);
  return e;
}

ModelConfig load_model_config(const KeyValueConfig& kv, std::optional<Family> family) {
  ModelConfig cfg;
  if (family) {
    cfg.family = *family;
    if (kv.has("family") && parse_family(kv.get_string("family")) != *family)
      throw ConfigError("config family '" + kv.get_string("family") + "' does not match the subcommand");
  } else {
    cfg.family = parse_family(kv.get_string("family"));
  }

  const int dim = kv.get_int("grid.dim", 1);
  if (dim != 1 && dim != 2) throw ConfigError("grid.dim must be 1 or 2");
  const int n = kv.get_int("grid.n", 64);
  const double len = kv.get_double("grid.length", 1.0);
  const double org = kv.get_double("grid.origin", 0.0);
  const int n0 = kv.get_int("grid.n0", n);
  const double l0 = kv.get_double("grid.length0", len);
  const double o0 = kv.get_double("grid.origin0", org);
  try {
    if (dim == 1) {
      cfg.grid = Grid::line(n0, l0, o0);
    } else {
      cfg.grid = Grid::box(n0, kv.get_int("grid.n1", n), l0, kv.get_double("grid.length1", len), o0,
                           kv.get_double("grid.origin1", org));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }

  cfg.h = kv.get_double("h");
  cfg.T = kv.get_double("T");
  cfg.seed = kv.get_u64("seed", 42);
  cfg.output_every = kv.get_int("output.every", 1);
  if (kv.has("output.pgm_max") && kv.get_string("output.pgm_max") != "auto")
    cfg.pgm_max = kv.get_double("output.pgm_max");

  cfg.wstep.tol = kv.get_double("wstep.tol", cfg.wstep.tol);
  cfg.wstep.max_iter = kv.get_int("wstep.max_iter", cfg.wstep.max_iter);
  cfg.wstep.n_t = kv.get_int("wstep.n_t", cfg.wstep.n_t);
  cfg.wstep.r_admm = kv.get_double("wstep.r_admm", cfg.wstep.r_admm);
  const std::string solver = kv.get_string("wstep.solver", "spectral");
  if (solver == "cg") cfg.wstep.linear_solver = LinearSolverKind::ConjugateGradient;
  else if (solver != "spectral") throw ConfigError("wstep.solver must be spectral or cg");
  cfg.frstep.tol = kv.get_double("frstep.tol", cfg.frstep.tol);
  cfg.frstep.max_newton = kv.get_int("frstep.max_newton", cfg.frstep.max_newton);

  cfg.init = kv.get_string("init");
  switch (cfg.family) {
    case Family::Scalar:
      cfg.diffusion = parse_nonlinearity(kv, "diffusion", "entropy", true);
      cfg.potential1 = kv.get_string("diffusion.potential", "zero");
      cfg.reaction = parse_nonlinearity(kv, "reaction", "zero", false);
      cfg.potential2 = kv.get_string("reaction.potential", "zero");
      cfg.reaction_weight = kv.get_double("reaction.weight", 1.0);
      break;
    case Family::PreyPredator:
      cfg.A = kv.get_double("system.A", cfg.A);
      cfg.B = kv.get_double("system.B", cfg.B);
      cfg.C = kv.get_double("system.C", cfg.C);
      cfg.kernel_signs = {kv.get_double("system.s11", 1.0), kv.get_double("system.s12", -1.0),
                          kv.get_double("system.s21", 1.0), kv.get_double("system.s22", 1.0)};
      cfg.init_second = kv.get_string("init.predator", "");
      break;
    case Family::HeleShaw:
      cfg.m = kv.get_double("heleshaw.m", cfg.m);
      break;
    case Family::Nutrient:
      cfg.m = kv.get_double("nutrient.m", cfg.m);
      cfg.c1 = kv.get_double("nutrient.c1", cfg.c1);
      cfg.c2 = kv.get_double("nutrient.c2", cfg.c2);
      cfg.init_second = kv.get_string("init.nutrient", "");
      break;
  }
  const auto unused = kv.unused_keys();
  if (!unused.empty()) {
    std::string msg = "unknown key(s) for family " + family_name(cfg.family) + ":";
    for (const auto& k : unused) msg += " " + k;
    throw ConfigError(msg);
  }
  cfg.validate();
  return cfg;
}

double complementarity_residual(const Field& rho, double m) {
  double s = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k) s += pressure_value(rho[k], m) * (1.0 - rho[k]);
  return s * rho.grid().cell_volume();
}

void write_diagnostics_csv(const std::filesystem::path& path, const Diagnostics& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const bool second = !d.second_name.empty();
  out << "step,t,mass_rho";
  if (second) out << ",mass_" << d.second_name;
  out << ",linf_rho,tv_rho,energy1,energy2,fr_sq,w2_sq,complementarity,wstep_iters,converged";
  out << ",w_mass_drift,linf_before,linf_half,fr_ratio_min,fr_ratio_max,fr_lower,fr_upper,fr_residual,"
         "sandwich_violations";
  if (second) out << ",linf_" << d.second_name << ",linf_" << d.second_name << "_half";
  out << '\n';
  for (const auto& r : d.rows) {
    out << r.step << ',' << fmt(r.t) << ',' << fmt(r.mass);
    if (second) out << ',' << fmt(r.mass_second);
    out << ',' << fmt(r.linf) << ',' << fmt(r.tv) << ',' << fmt(r.energy1) << ',' << fmt(r.energy2) << ','
        << fmt(r.fr_sq) << ',' << fmt(r.w2_sq) << ',' << fmt(r.complementarity) << ',' << r.wstep_iters << ','
        << (r.converged ? 1 : 0);
    out << ',' << fmt(r.w_mass_drift) << ',' << fmt(r.linf_before) << ',' << fmt(r.linf_half) << ','
        << fmt(r.fr_ratio_min) << ',' << fmt(r.fr_ratio_max) << ',' << fmt(r.fr_lower) << ',' << fmt(r.fr_upper)
        << ',' << fmt(r.fr_residual) << ',' << r.sandwich_violations;
    if (second) out << ',' << fmt(r.linf_second) << ',' << fmt(r.linf_second_half);
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing " + path.string());
}

Trajectory run_scalar(const ModelConfig& cfg, const DensityField& rho0, const StepObserver& obs) {
  require_density(rho0, cfg.grid, "initial density");
  const Field v1 = make_potential(cfg.grid, cfg.potential1);
  const Field v2 = make_potential(cfg.grid, cfg.potential2);
  const EnergySpec e1 = EnergySpec::diffusion(cfg.diffusion, v1);
  std::optional<Field> kappa;
  if (cfg.reaction_weight != 1.0) kappa = Field(cfg.grid, cfg.reaction_weight);
  const ReactionSpec e2(cfg.reaction, v2, kappa);
  const double h = cfg.h;

  Trajectory tr;
  tr.family = Family::Scalar;
  tr.steps = cfg.steps();
  tr.full.push_back({0, 0.0, rho0, {}, {}});
  tr.diagnostics.rows.push_back(initial_row(rho0, std::nullopt));
  Field rho = rho0;
  SpaceTimeStaggered warm;
  for (int k = 1; k <= tr.steps; ++k) {
    DiagnosticsRow row;
    row.step = k;
    row.t = k * h;
    row.linf_before = rho.max();
    const WOutcome w = w_half(rho, e1, h, cfg.wstep, warm);
    add_w(row, w);
    row.linf_half = w.half.max();
    const FrStepResult fr = fisher_rao_step(w.half, e2, h, cfg.frstep);
    add_fr(row, fr, w.half, e2, h, true);
    rho = fr.density;
    finish_row(tr, row, rho, obs);
    if (keep(cfg, k)) {
      tr.half.push_back({k, row.t, w.half, {}, {}});
      tr.full.push_back({k, row.t, rho, {}, {}});
    }
  }
  return tr;
}

Trajectory run_prey_predator(const ModelConfig& cfg, const DensityField& rho1_0, const DensityField& rho2_0,
                             const StepObserver& obs) {
  require_density(rho1_0, cfg.grid, "prey density");
  require_density(rho2_0, cfg.grid, "predator density");
  const double h = cfg.h;
  const auto& s = cfg.kernel_signs;
  const Nonlinearity g1 = cfg.A > 0.0 ? Nonlinearity::power(2.0) : Nonlinearity::zero();

  Trajectory tr;
  tr.family = Family::PreyPredator;
  tr.steps = cfg.steps();
  tr.diagnostics.second_name = "rho2";
  tr.full.push_back({0, 0.0, rho1_0, rho2_0, {}});
  tr.diagnostics.rows.push_back(initial_row(rho1_0, rho2_0));
  Field r1 = rho1_0, r2 = rho2_0;
  SpaceTimeStaggered warm1, warm2;
  for (int k = 1; k <= tr.steps; ++k) {
    DiagnosticsRow row;
    row.step = k;
    row.t = k * h;
    row.linf_before = r1.max();
    row.linf_second_before = r2.max();
    // Potentials and rates frozen at the last full step.
    const Field k1 = convolve_quadratic(r1);
    const Field k2 = convolve_quadratic(r2);
    Field v1(cfg.grid), v2(cfg.grid), u1(cfg.grid), u2(cfg.grid);
    for (std::size_t i = 0; i < v1.size(); ++i) {
      v1[i] = s[0] * k1[i] + s[1] * k2[i];
      v2[i] = s[2] * k1[i] + s[3] * k2[i];
      u1[i] = cfg.B * r2[i] / (1.0 + r1[i]) - cfg.A;
      u2[i] = -cfg.B * r1[i] / (1.0 + r1[i]) + cfg.C;
    }
    const EnergySpec e1 = EnergySpec::diffusion(Nonlinearity::entropy(), v1);
    const EnergySpec e2 = EnergySpec::diffusion(Nonlinearity::entropy(), v2);
    const WOutcome w1 = w_half(r1, e1, h, cfg.wstep, warm1);
    const WOutcome w2 = w_half(r2, e2, h, cfg.wstep, warm2);
    add_w(row, w1);
    add_w(row, w2);
    row.linf_half = w1.half.max();
    row.linf_second_half = w2.half.max();

    const ReactionSpec f1(g1, u1, Field(cfg.grid, 0.5 * cfg.A));
    const ReactionSpec f2(Nonlinearity::zero(), u2);
    const FrStepResult fr1 = fisher_rao_step(w1.half, f1, h, cfg.frstep);
    const FrStepResult fr2 = fisher_rao_step(w2.half, f2, h, cfg.frstep);
    add_fr(row, fr1, w1.half, f1, h, true);
    add_fr(row, fr2, w2.half, f2, h, false);
    r1 = fr1.density;
    r2 = fr2.density;
    row.mass_second = mass(r2);
    row.linf_second = r2.max();
    finish_row(tr, row, r1, obs);
    if (keep(cfg, k)) {
      tr.half.push_back({k, row.t, w1.half, w2.half, {}});
      tr.full.push_back({k, row.t, r1, r2, {}});
    }
  }
  return tr;
}

Trajectory run_heleshaw(const ModelConfig& cfg, const DensityField& rho0, const StepObserver& obs) {
  require_density(rho0, cfg.grid, "initial density");
  const double h = cfg.h;
  const EnergySpec e1 = EnergySpec::diffusion(Nonlinearity::power(cfg.m), Field(cfg.grid));
  const ReactionSpec e2 = ReactionSpec::hele_shaw(cfg.grid, cfg.m);

  Trajectory tr;
  tr.family = Family::HeleShaw;
  tr.steps = cfg.steps();
  if (cfg.m * h > 0.5)
    tr.warnings.push_back("m*h = " + short_fmt(cfg.m * h) + " > 0.5: the scheme is meant for m*h -> 0");
  if (rho0.max() > 1.0) tr.warnings.push_back("initial density exceeds 1");
  tr.full.push_back({0, 0.0, rho0, {}, pressure(rho0, cfg.m).values});
  DiagnosticsRow row0 = initial_row(rho0, std::nullopt);
  row0.complementarity = complementarity_residual(rho0, cfg.m);
  tr.diagnostics.rows.push_back(row0);
  Field rho = rho0;
  SpaceTimeStaggered warm;
  for (int k = 1; k <= tr.steps; ++k) {
    DiagnosticsRow row;
    row.step = k;
    row.t = k * h;
    row.linf_before = rho.max();
    const WOutcome w = w_half(rho, e1, h, cfg.wstep, warm);
    add_w(row, w);
    row.linf_half = w.half.max();
    const FrStepResult fr = fisher_rao_step(w.half, e2, h, cfg.frstep);
    add_fr(row, fr, w.half, e2, h, true);
    rho = fr.density;
    row.complementarity = complementarity_residual(rho, cfg.m);
    finish_row(tr, row, rho, obs);
    if (keep(cfg, k)) {
      tr.half.push_back({k, row.t, w.half, {}, {}});
      tr.full.push_back({k, row.t, rho, {}, pressure(rho, cfg.m).values});
    }
  }
  return tr;
}

Trajectory run_nutrient(const ModelConfig& cfg, const DensityField& rho0, const DensityField& c0,
                        const StepObserver& obs) {
  require_density(rho0, cfg.grid, "initial density");
  require_density(c0, cfg.grid, "initial nutrient");
  const double h = cfg.h;
  const EnergySpec e_rho = EnergySpec::diffusion(Nonlinearity::power(cfg.m), Field(cfg.grid));
  // Boltzmann entropy of c: its W step is the discrete heat flow.
  const EnergySpec e_c = EnergySpec::diffusion(Nonlinearity::entropy(), Field(cfg.grid));

  Trajectory tr;
  tr.family = Family::Nutrient;
  tr.steps = cfg.steps();
  tr.diagnostics.second_name = "c";
  if (cfg.m * h > 0.5)
    tr.warnings.push_back("m*h = " + short_fmt(cfg.m * h) + " > 0.5: the scheme is meant for m*h -> 0");
  if (rho0.max() > 1.0) tr.warnings.push_back("initial density exceeds 1");
  tr.full.push_back({0, 0.0, rho0, c0, pressure(rho0, cfg.m).values});
  DiagnosticsRow row0 = initial_row(rho0, c0);
  row0.complementarity = complementarity_residual(rho0, cfg.m);
  tr.diagnostics.rows.push_back(row0);
  Field rho = rho0, c = c0;
  SpaceTimeStaggered warm_rho, warm_c;
  for (int k = 1; k <= tr.steps; ++k) {
    DiagnosticsRow row;
    row.step = k;
    row.t = k * h;
    row.linf_before = rho.max();
    row.linf_second_before = c.max();
    const WOutcome w_rho = w_half(rho, e_rho, h, cfg.wstep, warm_rho);
    const WOutcome w_c = w_half(c, e_c, h, cfg.wstep, warm_c);
    add_w(row, w_rho);
    add_w(row, w_c);
    row.linf_half = w_rho.half.max();
    row.linf_second_half = w_c.half.max();

    const ReactionSpec f = ReactionSpec::nutrient(cfg.m, w_c.half, cfg.c1, cfg.c2);
    const FrStepResult fr = fisher_rao_step(w_rho.half, f, h, cfg.frstep);
    add_fr(row, fr, w_rho.half, f, h, true);
    Field c_next = fr_step_nutrient_c(w_c.half, w_rho.half, h);
    // (1 - h) c_half <= c_next <= c_half whenever rho_half <= 1
    if (w_rho.half.max() <= 1.0) {
      for (std::size_t i = 0; i < c_next.size(); ++i) {
        if (c_next[i] > w_c.half[i] * (1.0 + kRatioSlack) || c_next[i] < (1.0 - h) * w_c.half[i] * (1.0 - kRatioSlack)) {
          ++row.sandwich_violations;
          break;
        }
      }
    }
    row.fr_sq += fr_distance(c_next, w_c.half);
    rho = fr.density;
    c = std::move(c_next);
    row.complementarity = complementarity_residual(rho, cfg.m);
    row.mass_second = mass(c);
    row.linf_second = c.max();
    finish_row(tr, row, rho, obs);
    if (keep(cfg, k)) {
      tr.half.push_back({k, row.t, w_rho.half, w_c.half, {}});
      tr.full.push_back({k, row.t, rho, c, pressure(rho, cfg.m).values});
    }
  }
  return tr;
}

Trajectory run_model(const ModelConfig& cfg, const StepObserver& obs) {
  cfg.validate();
  const Field rho0 = make_initial(cfg.grid, cfg.init);
  const double h = cfg.h;
  switch (cfg.family) {
    case Family::Scalar: {
      const Field v2 = make_potential(cfg.grid, cfg.potential2);
      make_potential(cfg.grid, cfg.potential1);
      if (!(h * max_negative(v2) < 1.0))
        throw ConfigError("h * max(V2^-) must be < 1 for the Fisher-Rao step");
      return run_scalar(cfg, rho0, obs);
    }
    case Family::PreyPredator: {
      if (!(h * cfg.A < 1.0) || !(h * std::max(cfg.B - cfg.C, 0.0) < 1.0))
        throw ConfigError("h * A and h * (B - C) must be < 1 for the Fisher-Rao step");
      return run_prey_predator(cfg, rho0, make_initial(cfg.grid, cfg.init_second), obs);
    }
    case Family::HeleShaw:
      if (!(h < 1.0)) throw ConfigError("h must be < 1 for the Fisher-Rao step");
      return run_heleshaw(cfg, rho0, obs);
    case Family::Nutrient: {
      const Field c0 = make_initial(cfg.grid, cfg.init_second);
      if (!(h * std::max(cfg.c1 + c0.max() - cfg.c2, 0.0) < 1.0))
        throw ConfigError("h * (c1 + max c0 - c2) must be < 1 for the Fisher-Rao step");
      return run_nutrient(cfg, rho0, c0, obs);
    }
  }
  throw ConfigError("unknown family");
}

}  // namespace wfr
