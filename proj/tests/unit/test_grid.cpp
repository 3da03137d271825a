#include <doctest.h>

#include <cmath>
#include <random>

#include "wfr/grid.hpp"

using namespace wfr;
using doctest::Approx;

namespace {

Field random_field(const Grid& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Field f(g);
  for (auto& v : f.values()) v = d(rng);
  return f;
}

FaceField random_faces(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  FaceField v(g);
  for (int a = 0; a < g.dim(); ++a)
    for (auto& x : v.component(a)) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("grid geometry") {
  const Grid g = Grid::box(7, 5, 2.0, 3.0, -1.0, 0.5);
  CHECK(g.size() == 35);
  CHECK(g.cell_volume() == Approx(6.0 / 35.0).epsilon(1e-14));
  CHECK(g.cell_volume() * double(g.size()) == Approx(g.box_volume()).epsilon(1e-12));
  CHECK(g.center(0, 0) == Approx(-1.0 + 1.0 / 7.0));
  CHECK(g.coord(13, 0) == 6);
  CHECK(g.coord(13, 1) == 1);
  CHECK_THROWS_AS(Grid::line(1), std::invalid_argument);
  CHECK_THROWS_AS(Grid::box(4, 4, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Field(Grid::line(4), std::vector<double>(3, 0.0)), LayoutError);
}

TEST_CASE("mass") {
  for (int n : {2, 17, 64}) CHECK(mass(Field(Grid::box(n, n), 1.0)) == Approx(1.0).epsilon(1e-13));
  CHECK(mass(Field(Grid::line(32))) == 0.0);
  const Grid g = Grid::line(64);
  Field half(g);
  for (std::size_t i = 0; i < 32; ++i) half[i] = 2.0;
  CHECK(mass(half) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mass is linear") {
  std::mt19937_64 rng(42);
  const Grid g = Grid::box(9, 11, 1.5, 0.7);
  const Field f = random_field(g, rng), h = random_field(g, rng);
  const double a = 0.3, b = -2.1;
  CHECK(mass(a * f + b * h) == Approx(a * mass(f) + b * mass(h)).epsilon(1e-12));
}

TEST_CASE("total variation") {
  CHECK(total_variation(Field(Grid::box(8, 8), 3.0)) == Approx(3.0).epsilon(1e-14));
  const Grid g = Grid::line(64);
  Field step(g);
  for (std::size_t i = 32; i < 64; ++i) step[i] = 1.0;
  CHECK(total_variation(step) == Approx(1.5).epsilon(1e-14));

  // checkerboard against a direct loop over faces
  const int n = 6;
  const Grid b = Grid::box(n, n);
  Field cb(b);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) cb[std::size_t(j * n + i)] = (i + j) % 2 ? 2.0 : 0.5;
  double jumps = 0.0, l1 = 0.0;
  const double h = 1.0 / n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double v = cb[std::size_t(j * n + i)];
      l1 += std::abs(v) * h * h;
      if (i + 1 < n) jumps += std::abs(cb[std::size_t(j * n + i + 1)] - v) * h;
      if (j + 1 < n) jumps += std::abs(cb[std::size_t((j + 1) * n + i)] - v) * h;
    }
  CHECK(total_variation(cb) == Approx(jumps + l1).epsilon(1e-13));
}

TEST_CASE("convolution") {
  const Grid g = Grid::box(10, 10);
  const std::size_t k0 = 34;
  Field dirac(g);
  dirac[k0] = 1.0 / g.cell_volume();
  const auto quad = [](const std::array<double, 2>& d) { return d[0] * d[0] + d[1] * d[1]; };
  const Field out = convolve(quad, dirac);
  const auto x0 = g.cell_center(k0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto x = g.cell_center(k);
    CHECK(out[k] == Approx((x[0] - x0[0]) * (x[0] - x0[0]) + (x[1] - x0[1]) * (x[1] - x0[1])).epsilon(1e-12));
  }

  std::mt19937_64 rng(7);
  const Field f = random_field(g, rng, 0.0, 2.0);
  const Field ones = convolve([](const std::array<double, 2>&) { return 1.0; }, f);
  for (double v : ones.values()) CHECK(v == Approx(mass(f)).epsilon(1e-12));

  // 1D, f = 1 on [0, 1]: int |x - y|^2 dy = x^2 - x + 1/3
  const Grid line = Grid::line(32);
  const Field c = convolve(quad, Field(line, 1.0));
  const double dx = line.spacing(0);
  for (std::size_t i = 0; i < line.size(); ++i) {
    const double x = line.center(0, int(i));
    CHECK(std::abs(c[i] - (x * x - x + 1.0 / 3.0)) <= 2.0 * dx * dx);
  }
}

TEST_CASE("fast quadratic convolution matches direct quadrature") {
  std::mt19937_64 rng(3);
  for (const Grid& g : {Grid::line(40, 2.0, -1.0), Grid::box(12, 9, 4.0, 3.0, -2.0, -1.0)}) {
    const Field f = random_field(g, rng, 0.0, 1.0);
    const Field fast = convolve_quadratic(f);
    const Field slow = convolve([](const std::array<double, 2>& d) { return d[0] * d[0] + d[1] * d[1]; }, f);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(fast[k] - slow[k]) <= 1e-10 * (1.0 + std::abs(slow[k])));
  }
}

TEST_CASE("symmetric kernel convolution is self-adjoint") {
  std::mt19937_64 rng(11);
  const Grid g = Grid::box(8, 8);
  const Field f = random_field(g, rng), h = random_field(g, rng);
  const auto k = [](const std::array<double, 2>& d) { return std::exp(-(d[0] * d[0] + d[1] * d[1])); };
  CHECK(inner(convolve(k, f), h) == Approx(inner(f, convolve(k, h))).epsilon(1e-10));
}

TEST_CASE("gradient and divergence") {
  const Grid g = Grid::box(8, 8);
  const FaceField grad = gradient(Field(g, 2.5));
  for (int a = 0; a < 2; ++a)
    for (double v : grad.component(a)) CHECK(v == 0.0);
  const Field div = divergence(FaceField(g));
  for (double v : div.values()) CHECK(v == 0.0);

  std::mt19937_64 rng(42);
  for (const Grid& gr : {Grid::box(8, 8), Grid::line(13, 2.0), Grid::box(5, 9, 1.0, 3.0)}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Field f = random_field(gr, rng);
      FaceField v = random_faces(gr, rng);
      // boundary faces carry no flux
      for (int a = 0; a < gr.dim(); ++a) {
        const int other = gr.dim() == 2 ? gr.extent(1 - a) : 1;
        for (int o = 0; o < other; ++o) {
          v.component(a)[a == 0 ? v.face_index(0, 0, o) : v.face_index(1, o, 0)] = 0.0;
          v.component(a)[a == 0 ? v.face_index(0, gr.extent(0), o) : v.face_index(1, o, gr.extent(1))] = 0.0;
        }
      }
      CHECK(inner(gradient(f), v) == Approx(-inner(f, divergence(v))).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(inner(FaceField(Grid::line(4)), FaceField(Grid::line(5))), LayoutError);
}
