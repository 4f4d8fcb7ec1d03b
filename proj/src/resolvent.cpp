#include "hallsim/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "hallsim/error.hpp"
#include "hallsim/special.hpp"

namespace hallsim {

namespace {

constexpr double kPi = std::numbers::pi;

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

DecayFit fit_profile(const std::vector<double>& r, const std::vector<double>& amp, double a, double R) {
  double peak = *std::max_element(amp.begin(), amp.end());
  std::vector<double> xs, ys;
  double at_a = 0.0, best = HUGE_VAL;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (std::abs(r[i] - a) < best) {
      best = std::abs(r[i] - a);
      at_a = amp[i];
    }
    if (r[i] < 0.5 * a || r[i] > a) continue;
    xs.push_back(R - r[i]);
    ys.push_back(amp[i]);
  }
  if (xs.size() < 3) fail(ErrorCode::InsufficientDecayRange, "too few samples in the fit range");
  if (!(at_a <= 1e-3 * peak)) fail(ErrorCode::InsufficientDecayRange, "state is not small at the inner radius");
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (!(ys[i] > 0.0)) fail(ErrorCode::InsufficientDecayRange, "profile underflows in the fit range");
    if (i > 0 && ys[i] < ys[i - 1]) fail(ErrorCode::InsufficientDecayRange, "profile is not monotone");
  }
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double ly = std::log(ys[i] / peak);
    sx += xs[i];
    sy += ly;
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ly;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double icpt = (sy - slope * sx) / n;
  DecayFit f;
  f.lambda = -1.0 / slope;
  f.C = std::exp(icpt);
  f.r_lo = 0.5 * a;
  f.r_hi = a;
  f.points = xs.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double e = std::log(ys[i] / peak) - (icpt + slope * xs[i]);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

}  // namespace

ResolventParams ResolventParams::make(double energy, double B) {
  if (!(B > 0.0)) fail(ErrorCode::InvalidArgument, "field must be positive");
  ResolventParams p{energy, B};
  double z = p.zeta();
  double n = std::round(z);
  if (n >= 0.0 && std::abs(z - n) < 1e-12) fail(ErrorCode::OnLandauLevel, "energy on a Landau level");
  return p;
}

double kernel_modulus(double distance, const ResolventParams& p) {
  if (!(distance > 0.0)) fail(ErrorCode::CoincidentPoints, "kernel is singular at coincident points");
  double zeta = p.zeta();
  double z = 0.5 * p.B * distance * distance;
  return std::abs(gamma_function(-zeta) * std::exp(-0.5 * z) * tricomi_psi(-zeta, z)) / (4.0 * kPi);
}

std::complex<double> free_resolvent_kernel(const Point2& x, const Point2& y, const ResolventParams& p) {
  double dx = x.x - y.x, dy = x.y - y.y;
  double d2 = dx * dx + dy * dy;
  if (!(d2 > 0.0)) fail(ErrorCode::CoincidentPoints, "kernel is singular at coincident points");
  double zeta = p.zeta();
  double z = 0.5 * p.B * d2;
  double mag = -gamma_function(-zeta) * std::exp(-0.5 * z) * tricomi_psi(-zeta, z) / (4.0 * kPi);
  double phase = 0.5 * p.B * (x.y * y.x - x.x * y.y);
  return std::polar(1.0, phase) * mag;
}

double envelope_value(double distance, const EnvelopeFit& fit) {
  return fit.C * std::exp(-distance / fit.xi) * (1.0 + std::abs(std::log(distance / fit.xi)));
}

EnvelopeFit decay_bound_check(const ResolventParams& p, const std::vector<double>& distances) {
  if (distances.empty()) fail(ErrorCode::InvalidArgument, "no distances");
  std::vector<double> mod;
  for (double d : distances) mod.push_back(kernel_modulus(d, p));
  double ell = 1.0 / std::sqrt(p.B);
  EnvelopeFit best;
  best.mean_log_gap = HUGE_VAL;
  for (int k = 0; k <= 400; ++k) {
    EnvelopeFit f;
    f.xi = ell * std::pow(10.0, -1.5 + 3.0 * k / 400.0);
    for (std::size_t i = 0; i < distances.size(); ++i)
      f.C = std::max(f.C, mod[i] / envelope_value(distances[i], {1.0, f.xi}));
    double gap = 0.0;
    for (std::size_t i = 0; i < distances.size(); ++i) gap += std::log(envelope_value(distances[i], f) / mod[i]);
    f.mean_log_gap = gap / static_cast<double>(distances.size());
    if (f.mean_log_gap < best.mean_log_gap) best = f;
  }
  for (std::size_t i = 0; i < distances.size(); ++i)
    if (mod[i] > envelope_value(distances[i], best) * (1.0 + 1e-12)) ++best.violations;
  if (best.xi < 0.1 * ell || best.xi > 10.0 * ell)
    fail(ErrorCode::NonConvergence, "fitted decay length is not of the order of the magnetic length");
  return best;
}

DecayFit eigenfunction_decay_fit(const ChannelHamiltonian& ch, const std::vector<double>& u, double a, double R) {
  if (!std::holds_alternative<Corbino>(ch.geometry)) fail(ErrorCode::WrongGeometry, "decay fit needs a Corbino state");
  if (!(a > 0.0 && a < R)) fail(ErrorCode::InvalidArgument, "need 0 < a < R");
  double h = ch.grid.spacing();
  double norm = 0.0;
  for (double x : u) norm += x * x;
  std::vector<double> amp(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    amp[i] = std::abs(u[i]) / std::sqrt(2.0 * kPi * ch.coordinates[i] * h * norm);
  return fit_profile(ch.coordinates, amp, a, R);
}

DecayFit eigenfunction_decay_fit(const StripOperator& strip, const std::vector<cplx>& c, double a, double R) {
  if (!std::holds_alternative<Corbino>(strip.geometry)) fail(ErrorCode::WrongGeometry, "decay fit needs a Corbino state");
  if (!(a > 0.0 && a < R)) fail(ErrorCode::InvalidArgument, "need 0 < a < R");
  std::size_t M = strip.channel_count(), N = strip.grid_size();
  double h = strip.grid.spacing(), dphi = 2.0 * kPi / static_cast<double>(M);
  double norm = 0.0;
  for (const cplx& x : c) norm += std::norm(x);
  std::vector<double> d = strip.density(c);
  std::vector<double> r(N), amp(N, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    r[j] = strip.grid.point(j);
    for (std::size_t i = 0; i < M; ++i) amp[j] = std::max(amp[j], d[j * M + i]);
    amp[j] = std::sqrt(amp[j] / (norm * r[j] * h * dphi));
  }
  return fit_profile(r, amp, a, R);
}

double log_weight_integral(double xi) {
  if (!(xi > 0.0)) fail(ErrorCode::InvalidArgument, "decay length must be positive");
  // r = xi e^t
  auto f = [](double t) {
    double s = std::exp(t);
    return s * s * std::exp(-2.0 * s / 3.0) * t * t;
  };
  double core = adaptive_simpson(f, -60.0, 0.0, 1e-14) + adaptive_simpson(f, 0.0, 6.0, 1e-14);
  return 2.0 * kPi * xi * xi * core;
}

NeumannTail neumann_tail(double delta, double xi, double C) {
  if (!(delta >= 0.0)) fail(ErrorCode::InvalidArgument, "disorder bound must be >= 0");
  NeumannTail t;
  t.integral = log_weight_integral(xi);
  t.ratio = C * t.integral * delta;
  t.converges = t.ratio < 1.0;
  t.series_bound = t.converges ? 1.0 / (1.0 - t.ratio) : HUGE_VAL;
  return t;
}

}  // namespace hallsim
