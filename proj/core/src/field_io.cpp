#include "wfr/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace wfr {
namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Splits "a" or "axb" into one or two numbers.
std::vector<double> parse_extents(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto x = s.find('x', pos);
    const std::string part = s.substr(pos, x == std::string::npos ? std::string::npos : x - pos);
    out.push_back(std::stod(part));
    if (x == std::string::npos) break;
    pos = x + 1;
  }
  return out;
}

}  // namespace

void write_csv_snapshot(const std::filesystem::path& path, const Field& f, double time) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const Grid& g = f.grid();
  os << "# grid d=" << g.dim() << " n=" << g.extent(0);
  if (g.dim() == 2) os << 'x' << g.extent(1);
  os << " box=" << format_real(g.length(0));
  if (g.dim() == 2) os << 'x' << format_real(g.length(1));
  os << " t=" << format_real(time) << '\n';
  const int n0 = g.extent(0);
  const int n1 = g.extent(1);
  for (int j = 0; j < n1; ++j) {
    for (int i = 0; i < n0; ++i) {
      if (i) os << ',';
      os << format_real(f[std::size_t(j) * std::size_t(n0) + std::size_t(i)]);
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Snapshot read_csv_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string header;
  std::getline(is, header);
  if (header.rfind("# grid", 0) != 0) throw std::runtime_error(path.string() + ": missing grid header");
  int dim = 0;
  std::vector<double> n, box;
  double time = 0.0;
  std::istringstream hs(header.substr(6));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "d") dim = std::stoi(val);
    else if (key == "n") n = parse_extents(val);
    else if (key == "box") box = parse_extents(val);
    else if (key == "t") time = std::stod(val);
  }
  if (dim < 1 || dim > 2 || int(n.size()) != dim || int(box.size()) != dim)
    throw std::runtime_error(path.string() + ": malformed grid header");
  const Grid g = dim == 1 ? Grid::line(int(n[0]), box[0]) : Grid::box(int(n[0]), int(n[1]), box[0], box[1]);
  std::vector<double> values;
  values.reserve(g.size());
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) values.push_back(std::stod(cell));
  }
  if (values.size() != g.size()) throw std::runtime_error(path.string() + ": value count does not match header");
  return {Field(g, std::move(values)), time};
}

void write_pgm(const std::filesystem::path& path, const Field& f, std::optional<double> max_value) {
  const Grid& g = f.grid();
  if (g.dim() != 2) throw LayoutError("PGM output requires a 2D field");
  const double top = max_value.value_or(std::max(f.max(), 0.0));
  const double scale = top > 0.0 ? 255.0 / top : 0.0;
  const int w = g.extent(0);
  const int h = g.extent(1);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "P5\n" << w << ' ' << h << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(w));
  for (int j = h - 1; j >= 0; --j) {
    for (int i = 0; i < w; ++i) {
      const double v = f[std::size_t(j) * std::size_t(w) + std::size_t(i)] * scale;
      row[std::size_t(i)] = static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L));
    }
    os.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace wfr
