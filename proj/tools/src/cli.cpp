#include "wfr/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "wfr/config.hpp"
#include "wfr/field_io.hpp"
#include "wfr/oracle.hpp"
#include "wfr/parallel.hpp"
#include "wfr/validation.hpp"

namespace wfr::cli {
namespace {

namespace fs = std::filesystem;

std::string numbered(const std::string& stem, const char* kind, int step) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s_%s_%04d", stem.c_str(), kind, step);
  return buf;
}

class Writer {
 public:
  Writer(const fs::path& dir, const ModelConfig& cfg) : dir_(dir), cfg_(cfg) {}

  void field(const std::string& name, const Field& f, double t) {
    write_csv_snapshot(dir_ / (name + ".csv"), f, t);
    files.push_back(name + ".csv");
    if (f.grid().dim() == 2) {
      write_pgm(dir_ / (name + ".pgm"), f, cfg_.pgm_max);
      files.push_back(name + ".pgm");
    }
  }

  void frames(const std::vector<Frame>& frames, const char* kind, const std::string& second) {
    for (const auto& fr : frames) {
      field(numbered("snapshots/rho", kind, fr.step), fr.rho, fr.t);
      if (fr.second) field(numbered("snapshots/" + second, kind, fr.step), *fr.second, fr.t);
      if (fr.pressure) field(numbered("snapshots/p", kind, fr.step), *fr.pressure, fr.t);
    }
  }

  std::vector<std::string> files;

 private:
  fs::path dir_;
  const ModelConfig& cfg_;
};

struct RunOptions {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  bool quiet = false;
};

int cmd_run(Family family, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  ModelConfig cfg;
  try {
    KeyValueConfig kv = KeyValueConfig::load(opt.config);
    for (const auto& o : opt.overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + o + "'");
      kv.set(o.substr(0, eq), o.substr(eq + 1));
    }
    cfg = load_model_config(kv, family);
    // Build initial data and potentials up front so that a bad reference
    // fails before anything is written.
    make_initial(cfg.grid, cfg.init);
    if (!cfg.init_second.empty()) make_initial(cfg.grid, cfg.init_second);
    if (family == Family::Scalar) {
      make_potential(cfg.grid, cfg.potential1);
      make_potential(cfg.grid, cfg.potential2);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Trajectory tr;
  try {
    tr = run_model(cfg, [&](const DiagnosticsRow& r) {
      if (opt.quiet) return;
      char buf[200];
      std::snprintf(buf, sizeof buf, "step %d/%d t=%.6g mass=%.6g max=%.6g wstep_iters=%d%s\n", r.step,
                    cfg.steps(), r.t, r.mass, r.linf, r.wstep_iters, r.converged ? "" : " (not converged)");
      err << buf << std::flush;
    });
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& w : tr.warnings) err << "warning: " << w << '\n';

  try {
    const RunManifest m = write_run_outputs(cfg, tr, opt.out, wall);
    out << "wrote " << m.files.size() << " files to " << m.out_dir.string() << '\n';
  } catch (const std::exception& e) {
    err << "error writing outputs: " << e.what() << '\n';
    return kFailure;
  }
  if (!tr.converged) {
    err << "warning: some Wasserstein steps did not converge (see the converged column)\n";
    return kNotConverged;
  }
  return kOk;
}

int cmd_validate(const std::string& level, const std::vector<std::string>& overrides, std::ostream& out,
                 std::ostream& err) {
  ValidationSettings s;
  try {
    for (const auto& o : overrides) apply_override(s, o);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  const auto lvl = level == "full" ? ValidationLevel::Full : ValidationLevel::Quick;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_validation(lvl, s, [&](const CheckResult& c) { out << format_check(c) << '\n' << std::flush; });
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.pass ? 0 : 1;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu/%zu checks passed in %.1f s\n", rows.size() - failed, rows.size(), wall);
  out << buf;
  return failed == 0 ? kOk : kFailure;
}

struct W2Options {
  std::string a, b;
  int n_t = 16;
  double tol = 1e-6;
  int max_iter = 20000;
  double r_admm = 1.0;
};

int cmd_w2(const W2Options& o, std::ostream& out, std::ostream& err) {
  Snapshot a, b;
  try {
    a = read_csv_snapshot(o.a);
    b = read_csv_snapshot(o.b);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (!(a.field.grid() == b.field.grid())) {
    err << "config error: snapshots are on different grids\n";
    return kConfigError;
  }
  WStepConfig cfg;
  cfg.n_t = o.n_t;
  cfg.tol = o.tol;
  cfg.max_iter = o.max_iter;
  cfg.r_admm = o.r_admm;
  W2Result res;
  try {
    res = dynamic_w2(a.field, b.field, cfg);
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "dynamic_w2 %.10g\niterations %d\nconverged %d\n", res.value, res.report.iterations,
                res.report.converged ? 1 : 0);
  out << buf;
  if (a.field.grid().dim() == 1) {
    std::snprintf(buf, sizeof buf, "exact_w2 %.10g\n", oracle::w2_exact_1d(a.field, b.field));
    out << buf;
  }
  return res.report.converged ? kOk : kNotConverged;
}

}  // namespace

RunManifest write_run_outputs(const ModelConfig& cfg, const Trajectory& tr, const fs::path& out_dir,
                              double wall_seconds) {
  fs::create_directories(out_dir / "snapshots");
  Writer w(out_dir, cfg);
  const std::string second = tr.diagnostics.second_name;
  w.frames(tr.full, "full", second);
  w.frames(tr.half, "half", second);
  write_diagnostics_csv(out_dir / "diagnostics.csv", tr.diagnostics);
  w.files.push_back("diagnostics.csv");
  {
    std::ofstream os(out_dir / "config.txt");
    for (const auto& [k, v] : cfg.echo()) os << k << " = " << v << '\n';
    if (!os) throw std::runtime_error("cannot write config.txt");
  }
  w.files.push_back("config.txt");

  int total_iters = 0, max_iters = 0, violations = 0;
  double drift = 0.0, residual = 0.0;
  for (const auto& r : tr.diagnostics.rows) {
    total_iters += r.wstep_iters;
    max_iters = std::max(max_iters, r.wstep_iters);
    violations += r.sandwich_violations;
    drift = std::max(drift, r.w_mass_drift);
    residual = std::max(residual, r.fr_residual);
  }
  nlohmann::ordered_json j;
  j["family"] = family_name(cfg.family);
  nlohmann::ordered_json echo;
  for (const auto& [k, v] : cfg.echo()) echo[k] = v;
  j["config"] = echo;
  j["output_dir"] = fs::absolute(out_dir).string();
  j["steps"] = tr.steps;
  j["converged"] = tr.converged;
  j["wall_clock_seconds"] = wall_seconds;
  j["threads"] = thread_count();
  j["solver"] = {{"wstep_iterations_total", total_iters},
                 {"wstep_iterations_max_per_step", max_iters},
                 {"wstep_mass_drift_max", drift},
                 {"frstep_residual_max", residual},
                 {"sandwich_violations", violations}};
  j["warnings"] = tr.warnings;
  w.files.push_back("manifest.json");
  j["files"] = w.files;
  std::ofstream os(out_dir / "manifest.json");
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("cannot write manifest.json");
  return {out_dir, w.files, wall_seconds};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wasserstein-Fisher-Rao splitting simulator"};
  app.require_subcommand(1);

  RunOptions run_opt;
  struct Sub {
    const char* name;
    Family family;
    const char* help;
  };
  const Sub subs[] = {{"run-scalar", Family::Scalar, "scalar reaction-diffusion-advection equation"},
                      {"run-system", Family::PreyPredator, "two-species prey-predator system"},
                      {"run-heleshaw", Family::HeleShaw, "Hele-Shaw tumor growth (porous medium, large m)"},
                      {"run-nutrient", Family::Nutrient, "tumor growth with nutrient"}};
  std::vector<std::pair<CLI::App*, Family>> run_cmds;
  for (const auto& s : subs) {
    CLI::App* c = app.add_subcommand(s.name, s.help);
    c->add_option("-c,--config", run_opt.config, "key = value config file")->required();
    c->add_option("-o,--out", run_opt.out, "output directory")->required();
    c->add_option("--set", run_opt.overrides, "override a config key (key=value), repeatable");
    c->add_flag("-q,--quiet", run_opt.quiet, "no per-step progress");
    run_cmds.emplace_back(c, s.family);
  }

  std::string level = "quick";
  std::vector<std::string> val_overrides;
  CLI::App* val = app.add_subcommand("validate", "oracle-vs-solver checks");
  val->add_option("level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  val->add_option("--set", val_overrides, "override a solver setting (wstep.*, frstep.*, seed)");

  W2Options w2;
  CLI::App* w2c = app.add_subcommand("w2", "dynamic W2 between two snapshot files");
  w2c->add_option("a", w2.a, "first snapshot")->required();
  w2c->add_option("b", w2.b, "second snapshot")->required();
  w2c->add_option("--n-t", w2.n_t, "inner time steps")->check(CLI::Range(1, 1024));
  w2c->add_option("--tol", w2.tol, "ALG2 tolerance")->check(CLI::PositiveNumber);
  w2c->add_option("--max-iter", w2.max_iter, "ALG2 iteration cap")->check(CLI::PositiveNumber);
  w2c->add_option("--r-admm", w2.r_admm, "augmentation parameter")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    app.exit(e, out, err);
    return kConfigError;
  }

  for (const auto& [c, family] : run_cmds)
    if (c->parsed()) return cmd_run(family, run_opt, out, err);
  if (val->parsed()) return cmd_validate(level, val_overrides, out, err);
  if (w2c->parsed()) return cmd_w2(w2, out, err);
  return kConfigError;
}

}  // namespace wfr::cli
