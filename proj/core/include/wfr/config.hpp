#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "wfr/grid.hpp"

namespace wfr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text with dotted section names. `#` starts a comment,
/// blank lines are ignored, duplicate keys are an error. Keys read through
/// the getters are marked as used so that leftovers can be reported.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  /// Keys present in the file that no getter asked for.
  std::vector<std::string> unused_keys() const;
  const std::map<std::string, std::string>& entries() const { return values_; }
  std::string origin() const { return origin_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

double parse_double(const std::string& text, const std::string& what);

/// Initial data: `uniform:<v>`, `bump:<center>,<width>,<height>` (Gaussian
/// with standard deviation `width`), `disk:<center>,<radius>,<height>` or
/// `file:<path>` (CSV snapshot). In 2D a center is written `x;y`. Terms can
/// be added with `+`, e.g. `uniform:0.05+bump:0;0,0.2,0.5`.
Field make_initial(const Grid& grid, const std::string& spec);

/// Potentials: `zero`, `constant:<v>`, `linear:<g>` (g times the first
/// coordinate), `quadratic-well` (|x - box centre|^2 / 2) or `file:<path>`.
Field make_potential(const Grid& grid, const std::string& spec);

}  // namespace wfr
