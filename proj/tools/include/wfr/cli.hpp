#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wfr/models.hpp"

namespace wfr::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kNotConverged = 2;
inline constexpr int kFailure = 3;  ///< failed validation checks or an unexpected runtime error

/// What a run leaves behind, in the order the files were written.
struct RunManifest {
  std::filesystem::path out_dir;
  std::vector<std::string> files;  ///< relative to out_dir
  double wall_seconds = 0.0;
};

/// Writes snapshots (CSV, plus PGM in 2D), diagnostics.csv, the resolved
/// config and manifest.json into `out_dir`, creating it if needed.
RunManifest write_run_outputs(const ModelConfig& cfg, const Trajectory& tr, const std::filesystem::path& out_dir,
                              double wall_seconds);

/// Entry point of the `wfr` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wfr::cli
