#include "wfr/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wfr/field_io.hpp"

namespace wfr {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::array<double, 2> parse_point(const Grid& grid, const std::string& text, const std::string& what) {
  const auto parts = split(text, ';');
  if (int(parts.size()) != grid.dim())
    throw ConfigError(what + ": center needs " + std::to_string(grid.dim()) + " coordinate(s), got '" + text + "'");
  std::array<double, 2> c{0.0, 0.0};
  for (std::size_t d = 0; d < parts.size(); ++d) c[d] = parse_double(parts[d], what);
  return c;
}

double dist2(const Grid& grid, const std::array<double, 2>& x, const std::array<double, 2>& c) {
  double s = (x[0] - c[0]) * (x[0] - c[0]);
  if (grid.dim() == 2) s += (x[1] - c[1]) * (x[1] - c[1]);
  return s;
}

Field from_file(const Grid& grid, const std::string& path) {
  Snapshot snap;
  try {
    snap = read_csv_snapshot(path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read field file '" + path + "': " + e.what());
  }
  const Grid& g = snap.field.grid();
  if (g.dim() != grid.dim() || g.extent(0) != grid.extent(0) || g.extent(1) != grid.extent(1))
    throw ConfigError("field file '" + path + "' has grid " + g.describe() + ", expected " + grid.describe());
  std::vector<double> v(snap.field.values().begin(), snap.field.values().end());
  return Field(grid, std::move(v));
}

Field initial_term(const Grid& grid, const std::string& term) {
  const auto colon = term.find(':');
  if (colon == std::string::npos) throw ConfigError("initial data '" + term + "' needs a kind prefix");
  const std::string kind = trim(term.substr(0, colon));
  const std::string args = trim(term.substr(colon + 1));
  if (kind == "uniform") {
    const double v = parse_double(args, "uniform value");
    return Field(grid, v);
  }
  if (kind == "file") return from_file(grid, args);
  if (kind == "bump" || kind == "disk") {
    const auto parts = split(args, ',');
    if (parts.size() != 3) throw ConfigError(kind + " expects <center>,<size>,<height>, got '" + args + "'");
    const auto c = parse_point(grid, parts[0], kind);
    const double size = parse_double(parts[1], kind + " size");
    const double height = parse_double(parts[2], kind + " height");
    if (!(size > 0.0)) throw ConfigError(kind + " size must be > 0");
    if (kind == "bump") {
      return Field::from_function(grid, [&](const std::array<double, 2>& x) {
        return height * std::exp(-dist2(grid, x, c) / (2.0 * size * size));
      });
    }
    return Field::from_function(grid, [&](const std::array<double, 2>& x) {
      return dist2(grid, x, c) <= size * size ? height : 0.0;
    });
  }
  throw ConfigError("unknown initial data kind '" + kind + "'");
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
    throw ConfigError(what + ": '" + text + "' is not a finite number");
  return v;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
    if (!std::all_of(key.begin(), key.end(), [](char ch) {
          return std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_' || ch == '-';
        }))
      throw ConfigError(where + ": bad key '" + key + "'");
    if (!cfg.values_.emplace(key, value).second) throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
  used_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const { return parse_double(get_string(key), key); }

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const std::string t = get_string(key);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) throw ConfigError(key + ": '" + t + "' is not an integer");
  return v;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string t = get_string(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) throw ConfigError(key + ": '" + t + "' is not an unsigned integer");
  return v;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

Field make_initial(const Grid& grid, const std::string& spec) {
  // file paths may contain '+', so a file term must stand alone
  if (trim(spec).rfind("file:", 0) == 0) return initial_term(grid, trim(spec));
  Field out(grid);
  for (const auto& term : split(spec, '+')) {
    if (term.empty()) throw ConfigError("empty term in initial data '" + spec + "'");
    out += initial_term(grid, term);
  }
  for (double v : out.values())
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("initial data '" + spec + "' must be finite and >= 0");
  return out;
}

Field make_potential(const Grid& grid, const std::string& spec) {
  const std::string s = trim(spec);
  if (s == "zero") return Field(grid);
  if (s == "quadratic-well") {
    std::array<double, 2> c{grid.origin(0) + 0.5 * grid.length(0), grid.origin(1) + 0.5 * grid.length(1)};
    return Field::from_function(grid, [&](const std::array<double, 2>& x) { return 0.5 * dist2(grid, x, c); });
  }
  const auto colon = s.find(':');
  const std::string kind = colon == std::string::npos ? s : s.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (kind == "constant") return Field(grid, parse_double(arg, "constant potential"));
  if (kind == "linear") {
    const double g = parse_double(arg, "linear potential");
    return Field::from_function(grid, [&](const std::array<double, 2>& x) { return g * x[0]; });
  }
  if (kind == "file") {
    Field f = from_file(grid, trim(arg));
    for (double v : f.values())
      if (!std::isfinite(v)) throw ConfigError("potential file '" + arg + "' has non-finite values");
    return f;
  }
  throw ConfigError("unknown potential '" + spec + "'");
}

}  // namespace wfr
