#include "hallsim/mourre.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "hallsim/error.hpp"

namespace hallsim {

namespace {

double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_d1(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
double smoothstep_d2(double t) { return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

double golden_max(const std::function<double(double)>& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && b - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::max(fc, fd);
}

double sup_of(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
  double best = -HUGE_VAL;
  std::size_t arg = 0;
  double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double v = f(lo + step * static_cast<double>(i));
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  double a = lo + step * static_cast<double>(arg == 0 ? 0 : arg - 1);
  double b = lo + step * static_cast<double>(std::min(arg + 1, n - 1));
  return std::max(best, golden_max(f, a, b));
}

double smallest_eigenvalue(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0) return HUGE_VAL;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

double CutoffSpec::value(double y) const {
  double t = (y - b) / width;
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return 1.0 - smoothstep(t);
}

double CutoffSpec::d1(double y) const {
  double t = (y - b) / width;
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -smoothstep_d1(t) / width;
}

double CutoffSpec::d2(double y) const {
  double t = (y - b) / width;
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -smoothstep_d2(t) / (width * width);
}

CutoffSpec CutoffSpec::for_wall(const EdgeProfile& edge, double level) {
  if (!(level > 0.0)) fail(ErrorCode::InvalidCutoff, "cutoff level must be positive");
  double y = edge.level_crossing(level);
  if (!std::isfinite(y)) fail(ErrorCode::InvalidCutoff, "wall never reaches the cutoff level");
  double half = 0.5 * (y - edge.foot);
  return CutoffSpec{edge.foot + half, half};
}

double default_epsilon(const SpectralWindow& window) { return 0.5 * (window.disorder.delta + window.eta); }

ConstantsLedger constants_ledger(const EdgeProfile& edge, const CutoffSpec& cutoff, const SpectralWindow& window,
                                 double eps, std::size_t samples, double sup_limit) {
  if (samples < 3) fail(ErrorCode::InvalidArgument, "need at least three samples");
  if (!(cutoff.width > 0.0)) fail(ErrorCode::InvalidCutoff, "cutoff width must be positive");
  ConstantsLedger L;
  L.eta = window.eta;
  L.eps = eps;
  L.width = window.width();
  L.delta = window.disorder.delta;
  L.energy = window.center;
  L.cutoff = cutoff;

  double lo = std::min(edge.foot, cutoff.b), hi = cutoff.support_end();
  double jv = sup_of([&](double y) { return cutoff.value(y) * edge.value(y); }, lo, hi, samples);
  if (jv + L.delta > eps * (1.0 + 1e-12)) fail(ErrorCode::InvalidCutoff, "sup |j V| + delta exceeds epsilon");

  double limit = std::isnan(sup_limit) ? cutoff.b + 10.0 * cutoff.width : sup_limit;
  if (!(limit > cutoff.b)) fail(ErrorCode::InvalidCutoff, "empty supremum domain");
  for (std::size_t i = 0; i < samples; ++i) {
    double y = cutoff.b + (limit - cutoff.b) * static_cast<double>(i) / static_cast<double>(samples - 1);
    if (!(edge.derivative(y) > 0.0)) fail(ErrorCode::DegenerateWall, "wall gradient vanishes outside the cutoff");
  }
  auto inv = [&](double y) { return 1.0 / edge.derivative(y); };
  L.C1 = sup_of(inv, cutoff.b, limit, samples);
  double a = cutoff.b, b = cutoff.support_end();
  L.C2 = sup_of([&](double y) { double d = cutoff.d2(y); return d * d * inv(y); }, a, b, samples);
  L.C3 = sup_of([&](double y) { double d = cutoff.d1(y); return d * d * inv(y); }, a, b, samples);
  L.C4 = sup_of([&](double y) { return std::abs(cutoff.d1(y)); }, a, b, samples);

  L.D1 = std::sqrt(L.C2) + 2.0 * std::sqrt((L.energy + L.delta) * L.C3 + L.C2);
  L.D2 = 2.0 * std::pow(L.C3, 0.25) * std::sqrt(L.C4);
  L.D3 = std::sqrt(L.C1);
  double den = L.D1 + L.eta * L.D3;
  L.lambda = 1.0 + L.D2 * L.D2 / (4.0 * den);
  L.numerator = L.eta - L.lambda * L.width - eps;
  L.alpha_tilde = L.numerator > 0.0 ? std::pow(L.numerator / (2.0 * den), 2) : 0.0;
  return L;
}

ConstantsLedger constants_ledger(const EdgeProfile& edge, const SpectralWindow& window) {
  double eps = default_epsilon(window);
  return constants_ledger(edge, CutoffSpec::for_wall(edge, eps - window.disorder.delta), window, eps);
}

double disorder_threshold(const ConstantsLedger& ledger, double energy, double width) {
  double target = ledger.alpha_tilde;
  if (!(target > 0.0)) fail(ErrorCode::NoPositiveThreshold, "alpha_tilde is not positive");
  auto f = [&](double d) { return 2.0 * d * std::sqrt(energy + width + d); };
  double lo = 0.0, hi = target / (2.0 * std::sqrt(std::max(energy + width, 1e-300)));
  while (f(hi) < target) hi *= 2.0;
  while (hi - lo > 1e-10 * hi) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return lo;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double nn = static_cast<double>(n);
  return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

ScalingStudy scaling_study(const EdgeProfile& base, const std::vector<double>& scales, const SpectralWindow& window,
                           double eps) {
  if (scales.size() < 2) fail(ErrorCode::InvalidArgument, "scaling study needs two scales");
  ScalingStudy s;
  s.scales = scales;
  std::vector<double> c1, c2, c3, c4, al;
  for (double a : scales) {
    EdgeProfile e = base;
    e.scale = a;
    ConstantsLedger L = constants_ledger(e, CutoffSpec::for_wall(e, eps - window.disorder.delta), window, eps);
    s.ledgers.push_back(L);
    c1.push_back(L.C1);
    c2.push_back(L.C2);
    c3.push_back(L.C3);
    c4.push_back(L.C4);
    al.push_back(L.alpha_tilde);
  }
  s.slope_C1 = loglog_slope(scales, c1);
  s.slope_C2 = loglog_slope(scales, c2);
  s.slope_C3 = loglog_slope(scales, c3);
  s.slope_C4 = loglog_slope(scales, c4);
  bool positive = std::all_of(al.begin(), al.end(), [](double v) { return v > 0.0; });
  s.slope_alpha = positive ? loglog_slope(scales, al) : std::numeric_limits<double>::quiet_NaN();
  return s;
}

MourreReport commutator_positivity(const StripOperator& strip, const SpectralWindow& window,
                                   const ConstantsLedger& ledger, std::size_t max_pairs) {
  MourreReport r;
  r.window = window;
  r.ledger = ledger;
  r.alpha_tilde = ledger.alpha_tilde;
  if (ledger.alpha_tilde > 0.0) {
    r.delta_threshold = disorder_threshold(ledger, window.center, window.width());
    if (window.disorder.delta > r.delta_threshold) r.warnings.push_back("disorder bound exceeds threshold");
  } else {
    r.warnings.push_back("alpha_tilde is zero: window too wide for the ledger");
  }

  auto states = strip_window(strip, window.lo(), window.hi(), max_pairs);
  if (states.empty()) {
    r.warnings.push_back("empty window");
    r.pass = r.alpha_tilde > 0.0 && window.disorder.delta <= r.delta_threshold;
    return r;
  }

  std::vector<double> full = strip.gradient_samples(true);
  std::vector<double> wall = strip.gradient_samples(false);
  bool straight = !std::holds_alternative<Corbino>(strip.geometry);
  double width = 4.0 * strip.units.magnetic_length();
  for (const auto& s : states) {
    StatePositivity p;
    p.energy = s.energy;
    p.residual = s.residual;
    p.gradient = strip_expectation(strip, s.vector, full);
    p.edge_gradient = strip_expectation(strip, s.vector, wall);
    p.edge_weight = strip_weight_near_wall(strip, s.vector, width);
    if (straight) {
      VirialTerms t = virial_terms(strip, s.vector);
      p.virial_gradient = -t.potential;
      p.virial_velocity = strip.units.B * t.velocity;
      p.virial_residual = std::abs(t.residual);
    }
    r.alpha_min_state = std::min(r.alpha_min_state, p.gradient);
    r.states.push_back(p);
    if (s.residual > 1e-6) r.warnings.push_back("eigenpair residual above 1e-6");
  }
  r.alpha_emp = smallest_eigenvalue(strip_projection(strip, states, full));
  r.alpha_emp_edge = smallest_eigenvalue(strip_projection(strip, states, wall));
  const double tol = 1e-12;
  r.pass = r.alpha_emp > 0.0 && r.alpha_emp >= r.alpha_tilde - tol && r.alpha_tilde > 0.0 &&
           window.disorder.delta <= r.delta_threshold;
  return r;
}

MourreReport bounded_wall_positivity(const StripOperator& strip, double center, double half_width,
                                     const DisorderBounds& bounds, std::size_t max_pairs) {
  const EdgeProfile& edge = strip.edge;
  if (!edge.bounded()) fail(ErrorCode::InvalidArgument, "bounded-wall check needs a saturating wall");
  double top = edge.height;
  if (center >= top) fail(ErrorCode::WindowAboveWall, "window lies above the wall height");
  double gap = strip.units.gap_distance(center);
  double eta = std::min(gap, top - center);
  SpectralWindow window = SpectralWindow::with_gap(center, half_width, eta, bounds);
  double eps = default_epsilon(window);
  CutoffSpec cut = CutoffSpec::for_wall(edge, eps - bounds.delta);
  double saturation = edge.unbounded().level_crossing(top);
  ConstantsLedger L = constants_ledger(edge, cut, window, eps, 10000, std::nextafter(saturation, -HUGE_VAL));
  MourreReport r = commutator_positivity(strip, window, L, max_pairs);
  r.eta_branch = gap <= top - center ? "landau_gap" : "wall_height";
  return r;
}

BoundaryTrace boundary_gamma(const ChannelHamiltonian& ch, const std::vector<double>& u) {
  if (!std::holds_alternative<HalfPlaneDirichlet>(ch.geometry))
    fail(ErrorCode::WrongGeometry, "boundary trace needs the Dirichlet geometry");
  std::size_t n = u.size();
  double h = ch.grid.spacing();
  double norm = 0.0;
  for (double x : u) norm += x * x;
  double d = u[n - 2] - 4.0 * u[n - 1];
  return {d * d / (4.0 * h * h * h * norm), 1.0};
}

BoundaryTrace boundary_gamma(const StripOperator& strip, const std::vector<cplx>& c) {
  if (!std::holds_alternative<HalfPlaneDirichlet>(strip.geometry))
    fail(ErrorCode::WrongGeometry, "boundary trace needs the Dirichlet geometry");
  std::size_t M = strip.channel_count(), N = strip.grid_size();
  double h = strip.grid.spacing();
  double norm = 0.0;
  for (const cplx& x : c) norm += std::norm(x);
  double s = 0.0;
  for (std::size_t m = 0; m < M; ++m) s += std::norm(c[(N - 2) * M + m] - 4.0 * c[(N - 1) * M + m]);
  return {s / (4.0 * h * h * h * norm), 1.0};
}

namespace {

// Rows of `stride` values along the grid axis with zero boundary values.
template <class T>
KatoRatios kato_ratios(const std::vector<T>& c, std::size_t stride, std::size_t rows, double h,
                       const std::function<double(std::size_t, std::size_t)>& momentum) {
  double norm = 0.0, py = 0.0, pypy = 0.0, kx = 0.0;
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t m = 0; m < stride; ++m) {
      T v = c[j * stride + m];
      T up = j + 1 < rows ? c[(j + 1) * stride + m] : T(0);
      T dn = j > 0 ? c[(j - 1) * stride + m] : T(0);
      norm += std::norm(v);
      py += std::norm(up - v);
      pypy += std::norm(2.0 * v - up - dn);
      double k = momentum(j, m);
      kx += std::norm(v) * k * k;
    }
  // first difference into the lower boundary
  for (std::size_t m = 0; m < stride; ++m) py += std::norm(c[m]);
  KatoRatios r;
  r.py = std::sqrt(py / norm) / h;
  r.pypy = std::sqrt(pypy / norm) / (h * h);
  r.kinetic_x = std::sqrt(kx / norm);
  return r;
}

double kato_bound(const SpectralWindow& w, double B) {
  double e = w.center + w.width() + w.disorder.delta;
  return std::sqrt(e * e + 2.0 * B * B + 2.0 * w.disorder.delta2);
}

}  // namespace

KatoRatios kato_bounds_check(const ChannelHamiltonian& ch, const std::vector<double>& u, const Units& units,
                             const SpectralWindow& window) {
  if (std::holds_alternative<Corbino>(ch.geometry)) fail(ErrorCode::WrongGeometry, "Kato check is for straight edges");
  double momentum = ch.kappa;
  if (auto c = std::get_if<Cylinder>(&ch.geometry)) momentum /= c->R;
  double B = units.B;
  KatoRatios r = kato_ratios(u, 1, u.size(), ch.grid.spacing(),
                             [&](std::size_t j, std::size_t) { return momentum + B * ch.coordinates[j]; });
  r.bound = kato_bound(window, B);
  r.holds = r.pypy <= r.bound + 1e-9;
  return r;
}

KatoRatios kato_bounds_check(const StripOperator& strip, const std::vector<cplx>& c, const SpectralWindow& window) {
  if (std::holds_alternative<Corbino>(strip.geometry))
    fail(ErrorCode::WrongGeometry, "Kato check is for straight edges");
  double B = strip.units.B;
  std::vector<double> k(strip.channel_count());
  for (std::size_t m = 0; m < k.size(); ++m) k[m] = channel_parameter(strip.labels[m], strip.flux) / strip.period_radius;
  KatoRatios r = kato_ratios(c, strip.channel_count(), strip.grid_size(), strip.grid.spacing(),
                             [&](std::size_t j, std::size_t m) { return k[m] + B * strip.grid.point(j); });
  r.bound = kato_bound(window, B);
  r.holds = r.pypy <= r.bound + 1e-9;
  return r;
}

}  // namespace hallsim
