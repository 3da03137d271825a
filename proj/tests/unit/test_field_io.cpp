#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "wfr/config.hpp"
#include "wfr/field_io.hpp"

using namespace wfr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "wfr_test_field_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("CSV snapshots round trip exactly") {
  for (const Grid& g : {Grid::line(7, 2.0), Grid::box(5, 3, 1.0, 0.6)}) {
    Field f(g);
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = 1.0 / (3.0 + double(i)) + 1e-13 * double(i);
    const fs::path p = scratch("snap.csv");
    write_csv_snapshot(p, f, 0.125);
    const Snapshot s = read_csv_snapshot(p);
    CHECK(s.time == 0.125);
    CHECK(s.field.grid() == g);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(s.field[i] == f[i]);
    CHECK(make_initial(g, "file:" + p.string())[2] == f[2]);
  }
}

TEST_CASE("malformed snapshots are rejected") {
  const fs::path p = scratch("bad.csv");
  std::ofstream(p) << "# grid d=1 n=3 box=1 t=0\n1,2\n";
  CHECK_THROWS(read_csv_snapshot(p));
  std::ofstream(p) << "1,2,3\n";
  CHECK_THROWS(read_csv_snapshot(p));
  CHECK_THROWS(read_csv_snapshot(scratch("missing.csv")));
}

TEST_CASE("PGM output") {
  const Grid g = Grid::box(3, 2);
  Field f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = double(i);
  const fs::path p = scratch("img.pgm");
  write_pgm(p, f, 5.0);
  std::ifstream is(p, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const std::string header = "P5\n3 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  CHECK(bytes.substr(0, header.size()) == header);
  // top image row is the last row of the field
  const auto px = [&](int k) { return static_cast<unsigned char>(bytes[header.size() + k]); };
  CHECK(px(0) == 153);
  CHECK(px(2) == 255);
  CHECK(px(3) == 0);
  CHECK_THROWS(write_pgm(p, Field(Grid::line(4))));
}
