#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hallsim/bands.hpp"
#include "hallsim/error.hpp"

using namespace hallsim;

namespace {

const Units unit_field(1.0);
const EdgeProfile quadratic_wall = EdgeProfile::power_law(1.0, 1.0, 2.0);

// Chebyshev collocation on [-12, 0] with 200 nodes, -u'' + (y - 1)^2 u = E u.
constexpr double kDirichletShiftedGround = 6.074391061607732;

std::size_t argmax_abs(const std::vector<double>& v) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[k])) k = i;
  return k;
}

}  // namespace

TEST_SUITE("bands") {

TEST_CASE("flat half plane gives the full-line oscillator") {
  Grid1D grid = Grid1D::nodal(-12.0, 12.0, 4800);
  auto ch = channel_hamiltonian(HalfPlaneEdge{}, unit_field, EdgeProfile::flat(), 0.0, grid);
  auto p = solve_channel(ch, 3);
  CHECK(p[0].energy == doctest::Approx(1.0).epsilon(1e-5).scale(0.0));
  CHECK(p[1].energy == doctest::Approx(3.0).epsilon(1e-5).scale(0.0));
  CHECK(p[2].energy == doctest::Approx(5.0).epsilon(1e-5).scale(0.0));
}

TEST_CASE("dirichlet wall keeps the odd oscillator levels") {
  Grid1D grid = Grid1D::nodal(-12.0, 0.0, 2000);
  auto ch = channel_hamiltonian(HalfPlaneDirichlet{}, unit_field, EdgeProfile::flat(), 0.0, grid);
  auto p = solve_channel(ch, 3);
  CHECK(p[0].energy == doctest::Approx(3.0).epsilon(1e-4).scale(0.0));
  CHECK(p[1].energy == doctest::Approx(7.0).epsilon(1e-4).scale(0.0));
  CHECK(p[2].energy == doctest::Approx(11.0).epsilon(1e-4).scale(0.0));
  auto study = refine_channel(HalfPlaneDirichlet{}, unit_field, EdgeProfile::flat(), 0.0, Grid1D::nodal(-12.0, 0.0, 500), 0);
  CHECK(study.order >= 1.8);
  CHECK(study.order <= 2.2);
  CHECK(study.extrapolated == doctest::Approx(3.0).epsilon(1e-7).scale(0.0));
}

TEST_CASE("dirichlet grid must end at the wall") {
  CHECK_THROWS_AS(channel_hamiltonian(HalfPlaneDirichlet{}, unit_field, EdgeProfile::flat(), 0.0,
                                      Grid1D::nodal(-12.0, 1.0, 100)),
                  Error);
  CHECK_THROWS_AS(channel_hamiltonian(Cylinder{4.0}, unit_field, EdgeProfile::flat(), 0.0, Grid1D::radial(10.0, 100)),
                  Error);
}

TEST_CASE("dirichlet ground state off the wall against a collocation value") {
  auto study = refine_channel(HalfPlaneDirichlet{}, unit_field, EdgeProfile::flat(), -1.0,
                              Grid1D::nodal(-12.0, 0.0, 2000), 0);
  CHECK(study.values.back() == doctest::Approx(kDirichletShiftedGround).epsilon(2e-6).scale(0.0));
  CHECK(study.extrapolated == doctest::Approx(kDirichletShiftedGround).epsilon(1e-9).scale(0.0));
}

TEST_CASE("deep bulk dirichlet channel sits on the Landau levels") {
  Grid1D grid = Grid1D::nodal(-16.0, 0.0, 8000);
  auto ch = channel_hamiltonian(HalfPlaneDirichlet{}, unit_field, EdgeProfile::flat(), 8.0, grid);
  auto p = solve_channel(ch, 3);
  CHECK(std::abs(p[0].energy - 1.0) < 1e-6);
  CHECK(std::abs(p[1].energy - 3.0) < 3e-6);
  CHECK(std::abs(p[2].energy - 5.0) < 1e-5);
}

TEST_CASE("corbino ring state sits at its guiding radius") {
  Grid1D grid = Grid1D::radial(15.0, 3000);
  auto ch = channel_hamiltonian(Corbino{40.0}, unit_field, EdgeProfile::flat(), 5.0, grid);
  auto p = solve_channel(ch, 1);
  CHECK(p[0].energy == doctest::Approx(1.0).epsilon(1e-5).scale(0.0));
  double r_peak = ch.coordinates[argmax_abs(p[0].vector)];
  CHECK(r_peak == doctest::Approx(std::sqrt(10.0)).epsilon(0.1).scale(0.0));
  CHECK(ch.guiding_center == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("explicit and conservative corbino forms agree") {
  auto a = channel_hamiltonian(Corbino{40.0}, unit_field, EdgeProfile::flat(), 3.0, Grid1D::radial(14.0, 3000));
  auto b = channel_hamiltonian(Corbino{40.0}, unit_field, EdgeProfile::flat(), 3.0, Grid1D::nodal(0.0, 14.0, 3000));
  CHECK(solve_channel(a, 1)[0].energy == doctest::Approx(solve_channel(b, 1)[0].energy).epsilon(1e-4).scale(0.0));
}

TEST_CASE("dispersion rises without bound away from the bulk") {
  std::vector<double> kappa;
  for (int k = -40; k <= 40; ++k) kappa.push_back(0.2 * k);
  Grid1D grid = Grid1D::nodal(-16.0, 6.0, 1100);
  auto t = dispersion(HalfPlaneEdge{}, unit_field, quadratic_wall, kappa, grid, 3);
  for (std::size_t k = 0; k < kappa.size(); ++k) {
    for (std::size_t j = 1; j < t.energy[k].size(); ++j) CHECK(t.energy[k][j] > t.energy[k][j - 1]);
    CHECK(t.guiding_center[k] == doctest::Approx(-kappa[k]));
  }
  for (int n = 0; n < 3; ++n) {
    for (std::size_t k = 1; k < kappa.size(); ++k) {
      // energy grows as kappa decreases, continuously
      CHECK(t.value(k - 1, n) >= t.value(k, n) - 1e-9);
      CHECK(t.value(k - 1, n) - t.value(k, n) < 3.0);
    }
    CHECK(t.value(0, n) > 20.0);
    CHECK(t.value(kappa.size() - 1, n) == doctest::Approx(2 * n + 1).epsilon(1e-3).scale(0.0));
  }
  CHECK_THROWS_AS(t.value(0, 7), Error);
}

TEST_CASE("unsorted kappa grid is rejected") {
  CHECK_THROWS_AS(dispersion(HalfPlaneEdge{}, unit_field, quadratic_wall, {1.0, 0.0}, Grid1D::nodal(-10, 5, 100), 2),
                  Error);
}

TEST_CASE("threaded dispersion is identical to serial") {
  std::vector<double> kappa{-2.0, -1.0, 0.0, 1.0, 2.0, 3.0};
  Grid1D grid = Grid1D::nodal(-12.0, 6.0, 600);
  auto a = dispersion(HalfPlaneEdge{}, unit_field, quadratic_wall, kappa, grid, 3, 1);
  auto b = dispersion(HalfPlaneEdge{}, unit_field, quadratic_wall, kappa, grid, 3, 4);
  CHECK(a.energy == b.energy);
  CHECK(a.residual == b.residual);
}

TEST_CASE("cylinder flow relabels exactly under one flux quantum") {
  Geometry g = Cylinder{8.0, 10.0};
  Grid1D grid = Grid1D::nodal(-10.0, 10.0, 400);
  auto fluxes = uniform_fluxes(8, 2);
  auto t = spectral_flow(g, unit_field, quadratic_wall, grid, fluxes, -60, 60, 3);
  REQUIRE(fluxes.size() == 16);
  double worst = 0.0;
  for (std::size_t fi = 0; fi < 8; ++fi)
    for (int n = 0; n < 3; ++n)
      for (std::int64_t l = -59; l <= 60; ++l)
        worst = std::max(worst, std::abs(t.at(n, l, fi + 8).energy - t.at(n, l - 1, fi).energy));
  CHECK(worst == 0.0);
}

TEST_CASE("clean corbino flow follows the branch formula") {
  Geometry g = Corbino{30.0};
  Grid1D grid = Grid1D::radial(12.0, 2400);
  auto t = spectral_flow(g, unit_field, EdgeProfile::flat(), grid, uniform_fluxes(4), -3, 10, 2);
  for (const auto& e : t.entries) {
    double exact = corbino_clean_energy(unit_field, e.n, e.l, t.fluxes[e.flux_index]);
    // first order at the origin for |kappa| < 1
    double tol = std::abs(e.kappa) >= 1.0 ? 2e-4 : 2e-2;
    CHECK(e.energy == doctest::Approx(exact).epsilon(tol).scale(0.0));
  }
  // kappa < 0 branch: E = (2n+1) - 2 kappa, so -dE/dPhi = -1/pi
  for (const auto& e : t.entries)
    if (e.kappa < -0.5) CHECK(e.current == doctest::Approx(-1.0 / std::numbers::pi).epsilon(1e-3).scale(0.0));
}

TEST_CASE("edge channels carry currents of one sign") {
  Geometry g = Cylinder{8.0};
  Grid1D grid = Grid1D::nodal(-16.0, 6.0, 880);
  auto t = spectral_flow(g, unit_field, quadratic_wall, grid, uniform_fluxes(4), -16, 8, 2);
  int sign = 0;
  std::size_t edge = 0;
  for (const auto& e : t.entries) {
    if (e.edge_weight < 0.5) continue;
    ++edge;
    int s = e.current > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    CHECK(s == sign);
  }
  CHECK(edge > 10);
}

TEST_CASE("flat bulk channel carries no current") {
  Geometry g = Cylinder{8.0};
  Grid1D grid = Grid1D::nodal(-24.0, 6.0, 1200);
  auto t = spectral_flow(g, unit_field, quadratic_wall, grid, {Flux{}}, 80, 80, 2);
  CHECK(std::abs(t.at(0, 80, 0).current) < 1e-8);
  CHECK(t.at(0, 80, 0).mean_position == doctest::Approx(-10.0).epsilon(1e-6).scale(0.0));
}

TEST_CASE("flow table lookup") {
  auto t = spectral_flow(Cylinder{4.0}, unit_field, quadratic_wall, Grid1D::nodal(-12.0, 6.0, 200),
                         uniform_fluxes(4), 0, 3, 2);
  CHECK(t.flux_index(Flux::from_quanta(0.25)).value() == 1);
  CHECK_FALSE(t.flux_index(Flux::from_quanta(0.3)).has_value());
  CHECK(t.contains(2, Flux::from_quanta(0.5)));
  CHECK_FALSE(t.contains(4, Flux{}));
  CHECK_THROWS_AS(t.at(0, 9, 0), Error);
  CHECK_THROWS_AS(spectral_flow(HalfPlaneEdge{}, unit_field, quadratic_wall, Grid1D::nodal(-12, 6, 100), {Flux{}}, 0, 1, 1),
                  Error);
}

}  // TEST_SUITE
