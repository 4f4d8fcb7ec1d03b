#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "hallsim/error.hpp"
#include "hallsim/resolvent.hpp"
#include "hallsim/special.hpp"

using namespace hallsim;

namespace {

constexpr double kPi = std::numbers::pi;
const Units unit_field(1.0);
const EdgeProfile quadratic_wall = EdgeProfile::power_law(1.0, 1.0, 2.0);

// 30-digit references.
constexpr double kLogWeightUnit = 18.8155966608379732;

double laguerre_ref(int n, double z) {
  double a = 1.0, b = 1.0 - z;
  if (n == 0) return a;
  for (int k = 1; k < n; ++k) {
    double c = ((2.0 * k + 1.0 - z) * b - k * a) / (k + 1.0);
    a = b;
    b = c;
  }
  return b;
}

// sum_n L_n(z) / (n - zeta), Abel-summed through the generating function
// sum_n t^n L_n(z) = exp(-t z / (1 - t)) / (1 - t) and 1/(n - zeta) = int_0^1 t^(n - zeta - 1) dt.
double landau_sum(double z, double zeta) {
  int k = static_cast<int>(std::floor(zeta)) + 1;
  std::vector<double> L(400);
  for (int n = 0; n < 400; ++n) L[n] = laguerre_ref(n, z);
  double head = 0.0;
  for (int n = 0; n < k; ++n) head += L[n] / (n - zeta);
  auto tail = [&](double t) {
    if (t < 0.25) {
      double s = 0.0, tn = std::pow(t, k);
      for (int n = k; n < 400 && tn > 1e-300; ++n, tn *= t) s += tn * L[n];
      return s;
    }
    double g = std::exp(-t * z / (1.0 - t)) / (1.0 - t);
    for (int n = 0; n < k; ++n) g -= std::pow(t, n) * L[n];
    return g;
  };
  // t = s^2, three-point Gauss-Legendre panels
  const int panels = 4000;
  const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)}, gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  double sum = 0.0, h = 1.0 / panels;
  for (int p = 0; p < panels; ++p)
    for (int q = 0; q < 3; ++q) {
      double s = h * (p + 0.5 + 0.5 * gx[q]);
      double t = s * s;
      sum += 0.5 * h * gw[q] * 2.0 * s * std::pow(t, -zeta - 1.0) * tail(t);
    }
  return head + sum;
}

// sum_n P_n(x, y) / (E - (2n+1)B) with the level-n projection kernel
// P_n = (B/2pi) e^{i(B/2)(x2 y1 - x1 y2)} e^{-B d^2/4} L_n(B d^2/2).
std::complex<double> landau_oracle(const Point2& x, const Point2& y, double E, double B) {
  double d2 = (x.x - y.x) * (x.x - y.x) + (x.y - y.y) * (x.y - y.y);
  double z = 0.5 * B * d2, zeta = 0.5 * (E / B - 1.0);
  double phase = 0.5 * B * (x.y * y.x - x.x * y.y);
  return std::polar(1.0, phase) * (-std::exp(-0.5 * z) * landau_sum(z, zeta) / (4.0 * kPi));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

std::pair<ChannelHamiltonian, EigenPair> corbino_state(double R, std::int64_t l, std::size_t n = 4000) {
  auto ch = channel_hamiltonian(Corbino{R}, unit_field, quadratic_wall, static_cast<double>(l), Grid1D::radial(R + 6.0, n));
  SolverOptions so;
  so.polish = 20;
  auto p = solve_channel(ch, 1, so);
  return {ch, p[0]};
}

std::int64_t edge_label(double R, double E) {
  std::int64_t best = 0;
  double gap = HUGE_VAL;
  Grid1D grid = Grid1D::radial(R + 6.0, 4000);
  for (auto l = static_cast<std::int64_t>(R * R / 2 - 2 * R); l <= static_cast<std::int64_t>(R * R / 2 + 2 * R); ++l) {
    auto ch = channel_hamiltonian(Corbino{R}, unit_field, quadratic_wall, static_cast<double>(l), grid);
    double e = tridiagonal_eigenvalues(ch.op, 0, 1)[0];
    if (std::abs(e - E) < gap) {
      gap = std::abs(e - E);
      best = l;
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("resolvent") {

TEST_CASE("gamma family against reference values") {
  CHECK(log_gamma(0.5) == doctest::Approx(0.572364942924700087).epsilon(1e-13).scale(0.0));
  CHECK(log_gamma(7.3) == doctest::Approx(7.14789252302224869).epsilon(1e-13).scale(0.0));
  CHECK(log_gamma(-0.5) == doctest::Approx(1.26551212348464540).epsilon(1e-13).scale(0.0));
  CHECK(gamma_function(-0.5) == doctest::Approx(-2.0 * std::sqrt(kPi)).epsilon(1e-13).scale(0.0));
  CHECK(gamma_function(-1.5) == doctest::Approx(2.36327180120735470).epsilon(1e-13).scale(0.0));
  CHECK(digamma(0.7) == doctest::Approx(-1.22002355369793474).epsilon(1e-12).scale(0.0));
  CHECK(trigamma(0.7) == doctest::Approx(2.83404915669461091).epsilon(1e-12).scale(0.0));
  CHECK(laguerre(5, 2.3) == doctest::Approx(0.965325583333333240).epsilon(1e-13).scale(0.0));
  for (int n = 0; n < 30; ++n) CHECK(laguerre(n, 1.7) == doctest::Approx(laguerre_ref(n, 1.7)).epsilon(1e-12).scale(1.0));
}

TEST_CASE("tricomi function against reference values") {
  struct Row {
    double a, z, value;
  };
  for (Row r : {Row{-0.5, 0.1, -0.240758675928024314}, Row{-0.5, 5.0, 2.12673150192322634},
                Row{-0.5, 20.0, 4.41657145493875544}, Row{-1.5, 0.7, -0.986527951298215483},
                Row{-2.5, 12.5, 300.907882028964406}, Row{0.5, 3.0, 0.540612130919721011},
                Row{-0.25, 11.9, 1.84777853211637442}, Row{-0.25, 12.1, 1.85564897952892381}})
    CHECK(tricomi_psi(r.a, r.z) == doctest::Approx(r.value).epsilon(1e-10).scale(0.0));
}

TEST_CASE("tricomi polynomial cases") {
  for (double z : {0.01, 0.7, 3.0, 15.0, 80.0}) {
    CHECK(tricomi_psi(0.0, z) == doctest::Approx(1.0).epsilon(1e-12).scale(0.0));
    CHECK(tricomi_psi(-1.0, z) == doctest::Approx(z - 1.0).epsilon(1e-12).scale(1.0));
  }
  // Psi(-n, 1; z) = (-1)^n n! L_n(z)
  CHECK(tricomi_psi(-3.0, 0.7) == doctest::Approx(-6.0 * laguerre_ref(3, 0.7)).epsilon(1e-12).scale(0.0));
}

TEST_CASE("series and integral branches overlap") {
  for (double a : {-0.25, -0.5, -1.5})
    for (double z : {8.0, 12.0, 16.0})
      CHECK(tricomi_psi_series(a, z) == doctest::Approx(tricomi_psi_integral(a, z)).epsilon(1e-10).scale(0.0));
}

TEST_CASE("tricomi grows as a power at large argument") {
  double zeta = 0.25;
  std::vector<double> lz, lp;
  for (double z = 100.0; z <= 10000.0; z *= 1.5) {
    lz.push_back(std::log(z));
    lp.push_back(std::log(tricomi_psi(-zeta, z)));
  }
  double n = static_cast<double>(lz.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lz.size(); ++i) {
    sx += lz[i];
    sy += lp[i];
    sxx += lz[i] * lz[i];
    sxy += lz[i] * lp[i];
  }
  CHECK(std::abs((n * sxy - sx * sy) / (n * sxx - sx * sx) - zeta) < 1e-3);
  CHECK(std::abs(std::log(tricomi_psi(-zeta, 1e4)) / std::log(1e4) - zeta) < 1e-3);
}

TEST_CASE("parameters refuse Landau levels") {
  CHECK(code_of([] { ResolventParams::make(3.0, 1.0); }) == ErrorCode::OnLandauLevel);
  CHECK(code_of([] { ResolventParams::make(2.0, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK_NOTHROW(ResolventParams::make(0.5, 1.0));
  CHECK(ResolventParams::make(2.0, 1.0).zeta() == 0.5);
  auto p = ResolventParams::make(2.0, 1.0);
  CHECK(code_of([&] { free_resolvent_kernel({1, 2}, {1, 2}, p); }) == ErrorCode::CoincidentPoints);
  CHECK(code_of([&] { kernel_modulus(0.0, p); }) == ErrorCode::CoincidentPoints);
}

TEST_CASE("kernel is hermitian") {
  auto p = ResolventParams::make(2.0, 1.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    Point2 x{d(rng), d(rng)}, y{d(rng), d(rng)};
    auto a = free_resolvent_kernel(x, y, p), b = std::conj(free_resolvent_kernel(y, x, p));
    CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
  }
}

TEST_CASE("kernel matches the Landau sum") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi), shift(-2.0, 2.0);
  for (double B : {1.0, 2.0}) {
    double E = 2.0 * B;
    auto p = ResolventParams::make(E, B);
    double ell = 1.0 / std::sqrt(B);
    for (double d = 0.125; d <= 4.0; d += 0.125) {
      double th = angle(rng);
      Point2 y{shift(rng), shift(rng)};
      Point2 x{y.x + d * ell * std::cos(th), y.y + d * ell * std::sin(th)};
      auto ref = landau_oracle(x, y, E, B);
      CHECK(std::abs(free_resolvent_kernel(x, y, p) - ref) < 1e-6 * std::abs(ref));
    }
  }
  // upper gap
  auto p = ResolventParams::make(4.0, 1.0);
  for (double d : {0.3, 1.0, 2.5}) {
    Point2 x{d, 0.4}, y{0.0, 0.4};
    auto ref = landau_oracle(x, y, 4.0, 1.0);
    CHECK(std::abs(free_resolvent_kernel(x, y, p) - ref) < 1e-6 * std::abs(ref));
  }
}

TEST_CASE("kernel solves the magnetic equation away from the source") {
  auto p = ResolventParams::make(2.0, 1.0);
  Point2 y{0.3, -0.2};
  double h = 1e-3;
  for (Point2 x : {Point2{1.1, 0.4}, Point2{-0.5, 2.0}, Point2{2.5, -1.0}}) {
    auto R = [&](double a, double b) { return free_resolvent_kernel({a, b}, y, p); };
    auto c = R(x.x, x.y);
    auto lap = (R(x.x + h, x.y) + R(x.x - h, x.y) + R(x.x, x.y + h) + R(x.x, x.y - h) - 4.0 * c) / (h * h);
    auto gx = (R(x.x + h, x.y) - R(x.x - h, x.y)) / (2 * h), gy = (R(x.x, x.y + h) - R(x.x, x.y - h)) / (2 * h);
    double ax = -0.5 * x.y, ay = 0.5 * x.x;
    auto Hc = -lap + std::complex<double>(0, 2) * (ax * gx + ay * gy) + (ax * ax + ay * ay) * c;
    CHECK(std::abs(2.0 * c - Hc) < 1e-5 * std::abs(c));
  }
}

TEST_CASE("kernel has a logarithmic singularity") {
  auto p = ResolventParams::make(2.0, 1.0);
  double r2 = kernel_modulus(1e-3, p) / std::abs(std::log(1e-3));
  double r3 = kernel_modulus(1e-4, p) / std::abs(std::log(1e-4));
  CHECK(std::abs(r3 / r2 - 1.0) < 0.05);
  CHECK(std::isfinite(r3));
}

TEST_CASE("envelope dominates the kernel") {
  std::vector<double> d;
  for (int i = 1; i <= 80; ++i) d.push_back(0.1 * i);
  auto mid = ResolventParams::make(2.0, 1.0);
  auto f = decay_bound_check(mid, d);
  CHECK(f.xi >= 0.1);
  CHECK(f.xi <= 10.0);
  CHECK(f.violations == 0);
  CHECK(kernel_modulus(6.0, mid) <= envelope_value(6.0, f));
  // Gaussian beats the envelope far out
  CHECK(kernel_modulus(8.0, mid) < f.C * std::exp(-8.0 * 8.0 / 8.0));

  auto near = decay_bound_check(ResolventParams::make(2.98, 1.0), d);
  CHECK(f.C < near.C);

  auto strong = decay_bound_check(ResolventParams::make(8.0, 4.0), d);
  CHECK(strong.xi <= 10.0 * 0.5);
  CHECK(strong.xi >= 0.1 * 0.5);
  CHECK(code_of([&] { decay_bound_check(mid, {}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("corbino edge state decays towards the centre") {
  double R = 16.0;
  auto l = edge_label(R, 2.0);
  auto [ch, s] = corbino_state(R, l);
  auto f = eigenfunction_decay_fit(ch, s.vector, 8.0, R);
  CHECK(f.lambda > 0.0);
  CHECK(f.points > 100);
  CHECK(f.r_lo == 4.0);
  auto [fine, sf] = corbino_state(R, l, 8000);
  CHECK(eigenfunction_decay_fit(fine, sf.vector, 8.0, R).lambda == doctest::Approx(f.lambda).epsilon(0.01).scale(0.0));

  CHECK(code_of([&] { eigenfunction_decay_fit(ch, s.vector, 20.0, R); }) == ErrorCode::InvalidArgument);
  auto cyl = channel_hamiltonian(Cylinder{4.0}, unit_field, quadratic_wall, 0.0, Grid1D::nodal(-10, 5, 100));
  CHECK(code_of([&] { eigenfunction_decay_fit(cyl, solve_channel(cyl, 1)[0].vector, 1.0, 4.0); }) ==
        ErrorCode::WrongGeometry);
}

TEST_CASE("bulk state is rejected by the decay fit") {
  double R = 16.0;
  auto [ch, s] = corbino_state(R, static_cast<std::int64_t>(R * R / 8));
  CHECK(code_of([&] { eigenfunction_decay_fit(ch, s.vector, R / 2, R); }) == ErrorCode::InsufficientDecayRange);
}

TEST_CASE("decay length is uniform in the sample size" * doctest::should_fail()) {
  // The clean tail is Gaussian in R - r, so the fitted length shrinks with R.
  auto [c16, s16] = corbino_state(16.0, edge_label(16.0, 2.0));
  auto [c24, s24] = corbino_state(24.0, edge_label(24.0, 2.0));
  double a = eigenfunction_decay_fit(c16, s16.vector, 4.0, 16.0).lambda;
  double b = eigenfunction_decay_fit(c24, s24.vector, 4.0, 24.0).lambda;
  CHECK(std::abs(b / a - 1.0) <= 0.15);
}

TEST_CASE("weak disorder keeps the clean decay length" * doctest::should_fail()) {
  // Disorder admixes inner channels and turns the Gaussian tail exponential.
  double R = 8.0;
  Grid1D grid = Grid1D::radial(14.0, 280);
  auto labels = consecutive_labels(0, 56);
  auto field = std::make_shared<DisorderField>(generate(1, 0.05, 1.0, Grid2D{2.0 * kPi * R, labels.size(), grid}));
  auto strip = build_strip(Corbino{R}, unit_field, quadratic_wall, grid, labels, {}, field);
  auto states = strip_window(strip, 1.9, 2.1);
  REQUIRE_FALSE(states.empty());
  double dirty = eigenfunction_decay_fit(strip, states.back().vector, 4.0, R).lambda;
  auto ch = channel_hamiltonian(Corbino{R}, unit_field, quadratic_wall, 41.0, grid);
  SolverOptions so;
  so.polish = 20;
  double clean = eigenfunction_decay_fit(ch, solve_channel(ch, 1, so)[0].vector, 4.0, R).lambda;
  CHECK(std::abs(dirty / clean - 1.0) <= 0.3);
}

TEST_CASE("Neumann tail bookkeeping") {
  CHECK(log_weight_integral(1.0) == doctest::Approx(kLogWeightUnit).epsilon(1e-10).scale(0.0));
  CHECK(log_weight_integral(2.0) == doctest::Approx(4.0 * kLogWeightUnit).epsilon(1e-10).scale(0.0));
  auto zero = neumann_tail(0.0, 1.0);
  CHECK(zero.ratio == 0.0);
  CHECK(zero.converges);
  CHECK(zero.series_bound == 1.0);
  std::vector<double> ld, lr;
  for (double d : {1e-3, 1e-2, 3e-2}) {
    ld.push_back(std::log(d));
    lr.push_back(std::log(neumann_tail(d, 0.6, 2.0).ratio));
  }
  CHECK(std::abs((lr[2] - lr[0]) / (ld[2] - ld[0]) - 1.0) < 1e-6);
  CHECK(std::abs((lr[1] - lr[0]) / (ld[1] - ld[0]) - 1.0) < 1e-6);
  auto big = neumann_tail(1.0, 1.0);
  CHECK_FALSE(big.converges);
  CHECK(std::isinf(big.series_bound));
  CHECK(code_of([] { neumann_tail(-1.0, 1.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { log_weight_integral(0.0); }) == ErrorCode::InvalidArgument);
}

}  // TEST_SUITE
