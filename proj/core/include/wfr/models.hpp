#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wfr/config.hpp"
#include "wfr/energy.hpp"
#include "wfr/frstep.hpp"
#include "wfr/grid.hpp"
#include "wfr/wstep.hpp"

namespace wfr {

enum class Family { Scalar, PreyPredator, HeleShaw, Nutrient };

std::string family_name(Family f);

/// Everything needed to run one of the four drivers. Initial data are kept
/// as spec strings (see make_initial) so that a config round-trips.
struct ModelConfig {
  Family family = Family::Scalar;
  Grid grid;
  double h = 0.01;
  double T = 0.1;
  std::uint64_t seed = 42;
  int output_every = 1;               ///< keep every k-th snapshot (the last is always kept)
  std::optional<double> pgm_max;      ///< PGM scale; auto when absent

  WStepConfig wstep;
  FrStepConfig frstep;

  // scalar: E1 = F1 + V1 (diffusion), E2 = kappa F2 + V2 (reaction)
  Nonlinearity diffusion = Nonlinearity::entropy();
  std::string potential1 = "zero";
  Nonlinearity reaction = Nonlinearity::zero();
  std::string potential2 = "zero";
  double reaction_weight = 1.0;

  // prey-predator
  double A = 10.0, B = 70.0, C = 5.0;
  /// V1 = s11 |x|^2 * rho1 + s12 |x|^2 * rho2, V2 = s21 ... + s22 ...
  std::array<double, 4> kernel_signs{1.0, -1.0, 1.0, 1.0};

  // hele-shaw and nutrient
  double m = 100.0;
  double c1 = 1.0, c2 = 1.0;

  std::string init = "uniform:1";
  std::string init_second;  ///< predator or nutrient

  /// Number of outer steps, floor(T / h).
  int steps() const;
  /// Throws ConfigError when an invariant is violated.
  void validate() const;
  /// Resolved `key = value` listing.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Reads and validates a ModelConfig. Unknown keys are an error. `family`
/// overrides the `family` key when given.
ModelConfig load_model_config(const KeyValueConfig& kv, std::optional<Family> family = std::nullopt);

/// Per outer step record. The first columns are the public CSV contract;
/// the rest are invariant checks gathered along the way.
struct DiagnosticsRow {
  int step = 0;
  double t = 0.0;
  double mass = 0.0;
  double mass_second = 0.0;
  double linf = 0.0;
  double tv = 0.0;
  double energy1 = 0.0;  ///< diffusion energy after the W step
  double energy2 = 0.0;  ///< reaction energy after the FR step
  double fr_sq = 0.0;
  double w2_sq = 0.0;
  double complementarity = 0.0;
  int wstep_iters = 0;
  bool converged = true;

  double w_mass_drift = 0.0;    ///< max relative mass change over the W steps
  double linf_before = 0.0;     ///< max of the density entering the W step
  double linf_half = 0.0;       ///< max after the W step
  double fr_ratio_min = 1.0;    ///< out / in over the FR steps, cells with in > 0
  double fr_ratio_max = 1.0;
  double fr_lower = 1.0;        ///< sandwich factors for this step
  double fr_upper = 1.0;
  double fr_residual = 0.0;
  int sandwich_violations = 0;  ///< FR steps (any species) leaving [fr_lower, fr_upper]
  double linf_second = 0.0;       ///< max of predator / nutrient at the full step
  double linf_second_half = 0.0;  ///< ... after its W step
  double linf_second_before = 0.0;
};

struct Diagnostics {
  std::string second_name;  ///< "rho2", "c" or empty
  std::vector<DiagnosticsRow> rows;
};

void write_diagnostics_csv(const std::filesystem::path& path, const Diagnostics& d);

struct Frame {
  int step = 0;
  double t = 0.0;
  Field rho;
  std::optional<Field> second;
  std::optional<Field> pressure;
};

/// Full-step frames start at step 0; half-step frames (after the W step)
/// start at step 1 with t = k h.
struct Trajectory {
  Family family = Family::Scalar;
  std::vector<Frame> full;
  std::vector<Frame> half;
  Diagnostics diagnostics;
  std::vector<std::string> warnings;
  bool converged = true;
  int steps = 0;
};

/// Called after each outer step (for progress output).
using StepObserver = std::function<void(const DiagnosticsRow&)>;

Trajectory run_scalar(const ModelConfig& cfg, const DensityField& rho0, const StepObserver& obs = {});
Trajectory run_prey_predator(const ModelConfig& cfg, const DensityField& rho1, const DensityField& rho2,
                             const StepObserver& obs = {});
Trajectory run_heleshaw(const ModelConfig& cfg, const DensityField& rho0, const StepObserver& obs = {});
Trajectory run_nutrient(const ModelConfig& cfg, const DensityField& rho0, const DensityField& c0,
                        const StepObserver& obs = {});

/// Builds the initial data from the config strings and dispatches.
Trajectory run_model(const ModelConfig& cfg, const StepObserver& obs = {});

/// Complementarity residual sum p (1 - rho) vol.
double complementarity_residual(const Field& rho, double m);

}  // namespace wfr
