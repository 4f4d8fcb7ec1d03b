#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "hallsim/error.hpp"
#include "hallsim/linalg.hpp"
#include "hallsim/strip.hpp"

using namespace hallsim;

namespace {

constexpr double kPi = std::numbers::pi;
const Units unit_field(1.0);
const EdgeProfile quadratic_wall = EdgeProfile::power_law(1.0, 1.0, 2.0);

Grid2D small_grid(double R = 2.0, std::size_t nx = 16, std::size_t ny = 32) {
  return Grid2D{2.0 * kPi * R, nx, Grid1D::nodal(-4.0, 4.0, ny)};
}

struct Pair {
  std::vector<double> clean, dirty;
};

// Clean and disordered dense spectra of an M x N cylinder strip.
Pair spectra(std::size_t M, std::size_t N, double R, std::uint64_t seed, double delta) {
  Grid1D grid = Grid1D::nodal(-10.0, 4.0, N);
  auto all = labels_for_centres(unit_field, R, grid.lo + 4.0, grid.hi - 1.0);
  auto labels = consecutive_labels(all.front(), M);
  auto clean = build_strip(Cylinder{R}, unit_field, quadratic_wall, grid, labels);
  auto field = std::make_shared<DisorderField>(generate(seed, delta, 1.0, Grid2D{2.0 * kPi * R, M, grid}));
  auto dirty = build_strip(Cylinder{R}, unit_field, quadratic_wall, grid, labels, {}, field);
  return {eig_dense_values(clean.op), eig_dense_values(dirty.op)};
}

}  // namespace

TEST_SUITE("disorder") {

TEST_CASE("zero bound gives a zero field") {
  auto f = generate(5, 0.0, 1.0, small_grid());
  for (double v : f.values()) CHECK(v == 0.0);
  CHECK(f.sup_abs() == 0.0);
  CHECK(f.sup_gradient() == 0.0);
  CHECK(f.evaluate(1.3, 0.7) == 0.0);
}

TEST_CASE("field never exceeds its bound") {
  double delta = 0.3;
  auto f = generate(11, delta, 0.5, small_grid());
  CHECK(f.sup_abs() <= delta);
  double C = f.grid().circumference;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i)
    for (int j = 0; j < 1000; ++j) worst = std::max(worst, std::abs(f.evaluate(C * i / 1000.0, -4.0 + 8.0 * j / 999.0)));
  CHECK(worst <= delta);
  CHECK(worst > 0.5 * delta);
}

TEST_CASE("field is periodic along the circumference") {
  auto f = generate(3, 0.2, 1.0, small_grid());
  double C = f.grid().circumference;
  for (double x : {0.1, 2.7, 9.9})
    for (double y : {-3.0, 0.0, 2.2}) {
      CHECK(f.evaluate(x, y) == doctest::Approx(f.evaluate(x + C, y)).epsilon(1e-12).scale(1.0));
      CHECK(f.evaluate(x, y, 1) == doctest::Approx(f.evaluate(x - C, y, 1)).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("closed-form derivatives match differences") {
  auto f = generate(8, 0.2, 1.0, small_grid());
  double h = 1e-5;
  for (double x : {0.5, 3.1, 7.4})
    for (double y : {-2.5, -0.3, 1.9}) {
      double v = f.evaluate(x, y);
      if (std::abs(std::abs(v) - 0.2) < 1e-3) continue;
      double d1 = (f.evaluate(x, y + h) - f.evaluate(x, y - h)) / (2 * h);
      double d2 = (f.evaluate(x, y + h) - 2 * v + f.evaluate(x, y - h)) / (h * h);
      CHECK(f.evaluate(x, y, 1) == doctest::Approx(d1).epsilon(1e-6).scale(1.0));
      CHECK(f.evaluate(x, y, 2) == doctest::Approx(d2).epsilon(1e-3).scale(1.0));
    }
  CHECK(f.sup_gradient() > 0.0);
  CHECK(f.sup_curvature() > 0.0);
}

TEST_CASE("clipped samples are flagged") {
  auto f = generate(2, 0.02, 1.0, small_grid());
  std::size_t flagged = 0;
  for (std::size_t iy = 0; iy < f.ny(); ++iy)
    for (std::size_t ix = 0; ix < f.nx(); ++ix) {
      if (f.clipped(ix, iy)) {
        ++flagged;
        CHECK(std::abs(f.value(ix, iy)) == 0.02);
        CHECK(f.gradient(ix, iy) == 0.0);
      }
    }
  CHECK(f.clipped_fraction() == doctest::Approx(double(flagged) / (f.nx() * f.ny())));
}

TEST_CASE("regeneration is bit identical") {
  auto a = generate(42, 0.1, 1.0, small_grid());
  auto b = generate(42, 0.1, 1.0, small_grid());
  auto c = generate(43, 0.1, 1.0, small_grid());
  CHECK(a.values() == b.values());
  CHECK(a.bump_count() == b.bump_count());
  CHECK(a.values() != c.values());
  CHECK(a.seed() == 42);
}

TEST_CASE("binary field roundtrip") {
  auto f = generate(7, 0.15, 0.8, small_grid(2.0, 8, 12));
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  write_field(buf, f);
  std::string raw = buf.str();
  CHECK(raw.size() == 8 + 5 * 8 + 8 * 8 * 12);
  CHECK(raw.substr(0, 8) == "HALLDF01");
  std::uint64_t nx = 0;
  std::memcpy(&nx, raw.data() + 8, 8);
  CHECK(nx == 8);
  auto r = read_field(buf);
  CHECK(r.nx == 8);
  CHECK(r.ny == 12);
  CHECK(r.delta == 0.15);
  CHECK(r.correlation_length == 0.8);
  CHECK(r.seed == 7);
  CHECK(r.values == f.values());

  std::stringstream bad("NOTAFILE and some more bytes");
  CHECK_THROWS_AS(read_field(bad), Error);
}

TEST_CASE("quiet boxes occur with positive frequency") {
  double delta = 0.2;
  Grid2D g = small_grid(4.0, 8, 16);
  std::size_t quiet = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto f = generate(seed, delta, 1.0, g);
    double sup = 0.0;
    for (int i = 0; i <= 40; ++i)
      for (int j = 0; j <= 40; ++j) sup = std::max(sup, std::abs(f.evaluate(0.1 * i, -2.0 + 0.1 * j)));
    if (sup < 0.5 * delta) ++quiet;
  }
  MESSAGE("quiet boxes: " << quiet << " / 200");
  CHECK(quiet > 0);
}

TEST_CASE("disordered spectrum stays within the bound of the clean one") {
  double delta = 0.2;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto s = spectra(16, 32, 4.0, seed, delta);
    auto r = compare_spectra(s.clean, s.dirty, delta, delta);
    CHECK(r.eigenvalues == 512);
    CHECK(r.violations == 0);
    CHECK(r.max_distance <= delta);
    CHECK(r.max_matched_shift <= delta);
  }
}

TEST_CASE("zero disorder reproduces the clean spectrum") {
  auto s = spectra(16, 32, 4.0, 9, 0.0);
  REQUIRE(s.clean.size() == s.dirty.size());
  for (std::size_t i = 0; i < s.clean.size(); ++i)
    CHECK(s.dirty[i] == doctest::Approx(s.clean[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("spectrum comparison bookkeeping") {
  auto r = compare_spectra({1.0, 3.0, 5.0}, {1.05, 3.3, 4.95}, 0.1, 0.1);
  CHECK(r.eigenvalues == 3);
  CHECK(r.violations == 1);
  CHECK(r.max_distance == doctest::Approx(0.3));
  CHECK(r.max_matched_shift == doctest::Approx(0.3));
  CHECK(r.first_inclusion_fraction == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("first inclusion fraction grows with the domain") {
  double delta = 0.2;
  std::vector<double> mean;
  for (std::size_t n : {16, 32, 48}) {
    double R = n / 4.0;
    Grid1D grid = Grid1D::nodal(-10.0, 4.0, n);
    auto all = labels_for_centres(unit_field, R, grid.lo + 4.0, grid.hi - 1.0);
    auto labels = consecutive_labels(all.front(), n);
    auto clean = eig_dense_values(build_strip(Cylinder{R}, unit_field, quadratic_wall, grid, labels).op);
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto f = std::make_shared<DisorderField>(generate(seed, delta, 1.0, Grid2D{2.0 * kPi * R, n, grid}));
      auto dirty = eig_dense_values(build_strip(Cylinder{R}, unit_field, quadratic_wall, grid, labels, {}, f).op);
      sum += compare_spectra(clean, dirty, delta, 0.01).first_inclusion_fraction;
    }
    mean.push_back(sum / 3.0);
  }
  MESSAGE("first inclusion: " << mean[0] << " " << mean[1] << " " << mean[2]);
  CHECK(mean[1] >= mean[0]);
  CHECK(mean[2] >= mean[1]);
}

}  // TEST_SUITE
