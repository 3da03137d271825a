#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wfr/frstep.hpp"
#include "wfr/wstep.hpp"

namespace wfr {

enum class ValidationLevel { Quick, Full };

/// One line of the validation table: a measured quantity against its bound.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  std::string relation = "<=";  ///< how `measured` must compare with `bound`
  bool pass = false;
};

/// Solver settings under test. `validate --set key=value` edits these so a
/// deliberately loosened solver can be seen to fail.
struct ValidationSettings {
  WStepConfig wstep = [] {
    WStepConfig c;
    c.max_iter = 20000;  // the pinned-endpoint solves need more than a JKO step
    return c;
  }();
  FrStepConfig frstep;
  unsigned long long seed = 42;
};

/// Applies `key=value` overrides (wstep.*, frstep.*, seed). Throws
/// ConfigError on an unknown key or bad value.
void apply_override(ValidationSettings& s, const std::string& assignment);

/// Runs the oracle-vs-solver checks; `report` is called as each finishes.
std::vector<CheckResult> run_validation(ValidationLevel level, const ValidationSettings& settings,
                                        const std::function<void(const CheckResult&)>& report = {});

std::string format_check(const CheckResult& c);

}  // namespace wfr
