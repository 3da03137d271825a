#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "wfr/cli.hpp"
#include "wfr/config.hpp"
#include "wfr/field_io.hpp"
#include "wfr/validation.hpp"

using namespace wfr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "wfr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const char* name) {
  const fs::path d = fs::temp_directory_path() / "wfr_test_cli" / name;
  fs::remove_all(d);
  fs::create_directories(d.parent_path());
  return d;
}

fs::path write_config(const char* name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / "wfr_test_cli" / name;
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
  return p;
}

const char* kHeat =
    "family = scalar\n"
    "grid.n = 16\n"
    "h = 0.01\n"
    "T = 0.03\n"
    "init = uniform:0.2+bump:0.5,0.1,1\n";

}  // namespace

TEST_CASE("run writes snapshots, diagnostics and a manifest") {
  const fs::path cfg = write_config("heat.conf", kHeat);
  const fs::path out = fresh_dir("heat");
  const auto r = invoke({"run-scalar", "-c", cfg.string(), "-o", out.string(), "-q"});
  CHECK(r.code == cli::kOk);
  CHECK(fs::exists(out / "snapshots/rho_full_0000.csv"));
  CHECK(fs::exists(out / "snapshots/rho_full_0003.csv"));
  CHECK(fs::exists(out / "snapshots/rho_half_0001.csv"));
  CHECK_FALSE(fs::exists(out / "snapshots/rho_half_0000.csv"));
  CHECK(fs::exists(out / "diagnostics.csv"));
  std::ifstream js(out / "manifest.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j["family"] == "scalar");
  CHECK(j["converged"] == true);
  CHECK(j["steps"] == 3);
  CHECK(j["files"].size() == 4 + 3 + 3);
  CHECK(read_csv_snapshot(out / "snapshots/rho_full_0003.csv").time == doctest::Approx(0.03));
}

TEST_CASE("config errors exit 1 and leave nothing behind") {
  const fs::path out = fresh_dir("bad");
  for (const std::string text : {std::string(kHeat) + "bogus = 1\n", std::string("h = 0.01\nT = 0.1\n"),
                                 std::string(kHeat) + "grid.n = 0\n", std::string("not a config")}) {
    const fs::path cfg = write_config("bad.conf", text);
    const auto r = invoke({"run-scalar", "-c", cfg.string(), "-o", out.string()});
    CHECK(r.code == cli::kConfigError);
    CHECK(r.err.find("config error") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
  }
  const fs::path cfg = write_config("heat.conf", kHeat);
  CHECK(invoke({"run-scalar", "-c", cfg.string(), "-o", out.string(), "--set", "init=file:/none.csv"}).code ==
        cli::kConfigError);
  CHECK(invoke({"run-scalar", "-c", cfg.string(), "-o", out.string(), "--set", "noequals"}).code ==
        cli::kConfigError);
  CHECK(invoke({"run-heleshaw", "-c", cfg.string(), "-o", out.string()}).code == cli::kConfigError);
  CHECK(invoke({"run-scalar", "-c", "/none.conf", "-o", out.string()}).code == cli::kConfigError);
  CHECK(invoke({"run-scalar", "-o", out.string()}).code == cli::kConfigError);
  CHECK(invoke({"frobnicate"}).code == cli::kConfigError);
  CHECK(invoke({}).code == cli::kConfigError);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("non-convergence exits 2 with outputs written and flagged") {
  const fs::path cfg = write_config("heat.conf", kHeat);
  const fs::path out = fresh_dir("capped");
  const auto r = invoke({"run-scalar", "-c", cfg.string(), "-o", out.string(), "-q", "--set", "wstep.max_iter=2"});
  CHECK(r.code == cli::kNotConverged);
  std::ifstream js(out / "manifest.json");
  CHECK(nlohmann::json::parse(js)["converged"] == false);
  CHECK(fs::exists(out / "snapshots/rho_full_0003.csv"));
}

TEST_CASE("w2 subcommand") {
  const Grid g = Grid::line(32);
  const fs::path dir = fresh_dir("w2");
  fs::create_directories(dir);
  Field a = make_initial(g, "bump:0.3,0.08,1");
  Field b = make_initial(g, "bump:0.6,0.08,1");
  b *= mass(a) / mass(b);
  write_csv_snapshot(dir / "a.csv", a, 0.0);
  write_csv_snapshot(dir / "b.csv", b, 0.0);
  const auto r = invoke({"w2", (dir / "a.csv").string(), (dir / "b.csv").string(), "--tol", "1e-5"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("dynamic_w2 ") != std::string::npos);
  CHECK(r.out.find("exact_w2 ") != std::string::npos);
  CHECK(invoke({"w2", (dir / "a.csv").string(), (dir / "missing.csv").string()}).code == cli::kConfigError);
  write_csv_snapshot(dir / "c.csv", 2.0 * b, 0.0);
  CHECK(invoke({"w2", (dir / "a.csv").string(), (dir / "c.csv").string()}).code == cli::kConfigError);
}

TEST_CASE("validation overrides") {
  ValidationSettings s;
  apply_override(s, "wstep.tol=1e-3");
  apply_override(s, "frstep.max_newton=5");
  apply_override(s, "seed=9");
  CHECK(s.wstep.tol == 1e-3);
  CHECK(s.frstep.max_newton == 5);
  CHECK(s.seed == 9);
  CHECK_THROWS_AS(apply_override(s, "wstep.colour=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(s, "wstep.tol"), ConfigError);
  CHECK(invoke({"validate", "quick", "--set", "nope=1"}).code == cli::kConfigError);
  CHECK(invoke({"validate", "medium"}).code == cli::kConfigError);
}
