#include "hallsim/special.hpp"

#include <cmath>
#include <numbers>

#include "hallsim/error.hpp"

namespace hallsim {

namespace {

using ld = long double;

constexpr double kSwitch = 12.0;

ld digamma_ld(ld x) {
  const ld pi = 3.141592653589793238462643383279502884L;
  if (x <= 0.0L && x == std::floor(x)) fail(ErrorCode::InvalidArgument, "digamma pole");
  ld shift = 0.0L;
  if (x < 0.5L) return digamma_ld(1.0L - x) - pi / std::tan(pi * x);
  while (x < 12.0L) {
    shift -= 1.0L / x;
    x += 1.0L;
  }
  ld r = 1.0L / (x * x);
  // Bernoulli tail: 1/12, 1/120, 1/252, 1/240, 1/132, 691/32760, 1/12
  ld tail = r * (1.0L / 12 - r * (1.0L / 120 - r * (1.0L / 252 - r * (1.0L / 240 - r * (1.0L / 132 - r * (691.0L / 32760 - r / 12.0L))))));
  return shift + std::log(x) - 0.5L / x - tail;
}

bool nonpositive_integer(double a) { return a <= 0.0 && a == std::floor(a); }

}  // namespace

double digamma(double x) { return static_cast<double>(digamma_ld(x)); }

double trigamma(double x) {
  if (nonpositive_integer(x)) fail(ErrorCode::InvalidArgument, "trigamma pole");
  const double pi = std::numbers::pi;
  if (x < 0.5) {
    double s = std::sin(pi * x);
    return -trigamma(1.0 - x) + pi * pi / (s * s);
  }
  ld acc = 0.0L, y = x;
  while (y < 12.0L) {
    acc += 1.0L / (y * y);
    y += 1.0L;
  }
  ld r = 1.0L / (y * y);
  // 1/y + 1/(2y^2) + sum B_2k / y^(2k+1)
  ld tail = (1.0L + r * (1.0L / 6 - r * (1.0L / 30 - r * (1.0L / 42 - r * (1.0L / 30 - r * 5.0L / 66))))) / y;
  return static_cast<double>(acc + tail + 0.5L * r);
}

double log_gamma(double x) { return std::lgamma(x); }

double gamma_function(double x) {
  if (nonpositive_integer(x)) fail(ErrorCode::InvalidArgument, "gamma pole");
  return std::tgamma(x);
}

double laguerre(int n, double z) {
  if (n < 0) fail(ErrorCode::InvalidArgument, "Laguerre degree must be >= 0");
  double p0 = 1.0, p1 = 1.0 - z;
  if (n == 0) return p0;
  for (int k = 1; k < n; ++k) {
    double p2 = ((2.0 * k + 1.0 - z) * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double tricomi_psi_series(double a, double z) {
  if (!(z > 0.0)) fail(ErrorCode::InvalidArgument, "tricomi_psi needs z > 0");
  if (nonpositive_integer(a)) {
    int n = static_cast<int>(-a);
    return (n % 2 ? -1.0 : 1.0) * std::tgamma(n + 1.0) * laguerre(n, z);
  }
  ld lz = std::log(static_cast<ld>(z));
  ld term = 1.0L;  // (a)_k z^k / (k!)^2
  ld sum = 0.0L, comp = 0.0L;
  ld psi_a = digamma_ld(a);
  ld psi_1 = digamma_ld(1.0L);
  for (int k = 0; k < 400; ++k) {
    ld t = term * (lz + psi_a - 2.0L * psi_1);
    // Kahan summation
    ld y = t - comp;
    ld s = sum + y;
    comp = (s - sum) - y;
    sum = s;
    if (k > z && std::fabs(t) < 1e-22L * std::fabs(sum)) break;
    ld ak = static_cast<ld>(a) + k;
    psi_a += 1.0L / ak;
    psi_1 += 1.0L / (k + 1.0L);
    term *= ak * z / ((k + 1.0L) * (k + 1.0L));
  }
  return static_cast<double>(-sum / std::tgamma(static_cast<ld>(a)));
}

namespace {

// a > 0: U(a,1,z) = z^-a / Gamma(a) * int_0^inf e^-x x^(a-1) (1 + x/z)^-a dx,
// double-exponential substitution x = exp(u - e^-u).
ld integral_positive(ld a, ld z) {
  const ld h = 1.0L / 64.0L;
  ld sum = 0.0L;
  for (int i = -64 * 6; i <= 64 * 5; ++i) {
    ld u = h * i;
    ld e = std::exp(-u);
    ld x = std::exp(u - e);
    ld f = std::exp(-x + a * std::log(x) - a * std::log1p(x / z)) * (1.0L + e);
    sum += f;
  }
  return sum * h * std::pow(z, -a) / std::tgamma(a);
}

}  // namespace

double tricomi_psi_integral(double a, double z) {
  if (!(z > 0.0)) fail(ErrorCode::InvalidArgument, "tricomi_psi needs z > 0");
  if (nonpositive_integer(a)) return tricomi_psi_series(a, z);
  if (a >= 1.0) return static_cast<double>(integral_positive(a, z));
  // Downward recurrence U(a-1) = -(1 - 2a - z) U(a) - a^2 U(a+1), from a0 in [1, 2).
  ld a0 = a - std::floor(a) + 1.0L;
  ld up = integral_positive(a0 + 1.0L, z);
  ld cur = integral_positive(a0, z);
  for (ld s = a0; s > a + 0.5L; s -= 1.0L) {
    ld next = -(1.0L - 2.0L * s - z) * cur - s * s * up;
    up = cur;
    cur = next;
  }
  return static_cast<double>(cur);
}

double tricomi_psi(double a, double z) {
  if (!(z > 0.0)) fail(ErrorCode::InvalidArgument, "tricomi_psi needs z > 0");
  if (nonpositive_integer(a)) return tricomi_psi_series(a, z);
  return a < 0.0 && z <= kSwitch ? tricomi_psi_series(a, z) : tricomi_psi_integral(a, z);
}

}  // namespace hallsim
