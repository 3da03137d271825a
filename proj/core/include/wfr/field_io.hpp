#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "wfr/grid.hpp"

namespace wfr {

/// A field read back from a snapshot file together with its time stamp.
struct Snapshot {
  Field field;
  double time = 0.0;
};

/// Writes a CSV snapshot: header `# grid d=.. n=..[x..] box=..[x..] t=..`,
/// then one line per row of axis 1 (a single line in 1D), values printed
/// with 17 significant digits.
void write_csv_snapshot(const std::filesystem::path& path, const Field& f, double time);

/// Parses a snapshot written by `write_csv_snapshot`. The box origin is not
/// stored and is taken as 0.
Snapshot read_csv_snapshot(const std::filesystem::path& path);

/// Writes an 8-bit binary PGM (P5) of a 2D field. Values are scaled by
/// `max_value`, or by the field maximum when absent; row 0 of the image is
/// the top row (largest axis-1 index).
void write_pgm(const std::filesystem::path& path, const Field& f,
               std::optional<double> max_value = std::nullopt);

}  // namespace wfr
