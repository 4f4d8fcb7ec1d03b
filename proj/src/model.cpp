#include "hallsim/model.hpp"

#include <cmath>
#include <numbers>

#include "hallsim/error.hpp"

namespace hallsim {

Units::Units(double field) : B(field) {
  if (!(field > 0.0) || !std::isfinite(field)) fail(ErrorCode::InvalidArgument, "B must be positive");
}

double Units::magnetic_length() const { return 1.0 / std::sqrt(B); }
double Units::cyclotron_energy() const { return 2.0 * B; }

double Units::landau_level(int n) const {
  if (n < 0) fail(ErrorCode::InvalidArgument, "band index must be nonnegative");
  return static_cast<double>(2 * n + 1) * B;
}

double Units::landau_level_cyclotron(int n) const {
  if (n < 0) fail(ErrorCode::InvalidArgument, "band index must be nonnegative");
  return (static_cast<double>(n) + 0.5) * cyclotron_energy();
}

double Units::gap_distance(double energy) const {
  double m = std::round((energy / B - 1.0) / 2.0);
  if (m < 0.0) m = 0.0;
  return std::abs(energy - (2.0 * m + 1.0) * B);
}

double landau_level(const Units& units, int n) { return units.landau_level(n); }

Flux Flux::from_phase(double phi) { return from_quanta(phi / (2.0 * std::numbers::pi)); }

Flux Flux::from_quanta(double q) {
  Flux f;
  double whole = std::floor(q);
  f.quanta = static_cast<std::int64_t>(whole);
  f.fraction = q - whole;
  if (f.fraction >= 1.0) {
    f.quanta += 1;
    f.fraction = 0.0;
  }
  return f;
}

double Flux::phase() const { return 2.0 * std::numbers::pi * in_quanta(); }
double Flux::in_quanta() const { return static_cast<double>(quanta) + fraction; }

Flux Flux::shifted(std::int64_t dq) const {
  Flux f = *this;
  f.quanta += dq;
  return f;
}

double channel_parameter(std::int64_t l, const Flux& flux) {
  return static_cast<double>(l - flux.quanta) - flux.fraction;
}

double corbino_clean_energy(const Units& units, int n, std::int64_t l, const Flux& flux) {
  double base = units.landau_level(n);
  double kappa = channel_parameter(l, flux);
  if (kappa >= 0.0) return base;
  return base - 2.0 * kappa * units.B;
}

std::string geometry_name(const Geometry& geom) {
  switch (geom.index()) {
    case 0: return "cylinder";
    case 1: return "halfplane_edge";
    case 2: return "halfplane_dirichlet";
    default: return "corbino";
  }
}

void validate(const Geometry& geom) {
  if (auto c = std::get_if<Cylinder>(&geom)) {
    if (!(c->R > 0.0) || !(c->L > 0.0)) fail(ErrorCode::InvalidArgument, "cylinder needs R > 0 and L > 0");
  } else if (auto k = std::get_if<Corbino>(&geom)) {
    if (!(k->R > 0.0)) fail(ErrorCode::InvalidArgument, "corbino needs R > 0");
  }
}

EdgeProfile EdgeProfile::flat() { return {}; }

EdgeProfile EdgeProfile::power_law(double strength, double scale, double power, double foot) {
  EdgeProfile e;
  e.kind = WallKind::PowerLaw;
  e.strength = strength;
  e.scale = scale;
  e.power = power;
  e.foot = foot;
  return e;
}

EdgeProfile EdgeProfile::exponential(double strength, double scale, double foot) {
  EdgeProfile e;
  e.kind = WallKind::Exponential;
  e.strength = strength;
  e.scale = scale;
  e.foot = foot;
  return e;
}

EdgeProfile EdgeProfile::saturating(double strength, double scale, double power, double height,
                                    double foot) {
  EdgeProfile e = power_law(strength, scale, power, foot);
  e.kind = WallKind::Saturating;
  e.height = height;
  return e;
}

double EdgeProfile::value(double y) const {
  if (kind == WallKind::Flat) return 0.0;
  double t = (y - foot) / scale;
  if (t <= 0.0) return 0.0;
  switch (kind) {
    case WallKind::PowerLaw: return strength * std::pow(t, power);
    case WallKind::Exponential: return strength * std::expm1(t);
    case WallKind::Saturating: return std::min(strength * std::pow(t, power), height);
    default: return 0.0;
  }
}

double EdgeProfile::derivative(double y) const {
  if (kind == WallKind::Flat) return 0.0;
  double t = (y - foot) / scale;
  if (t <= 0.0) return 0.0;
  switch (kind) {
    case WallKind::PowerLaw: return strength * power * std::pow(t, power - 1.0) / scale;
    case WallKind::Exponential: return strength * std::exp(t) / scale;
    case WallKind::Saturating:
      if (strength * std::pow(t, power) >= height) return 0.0;
      return strength * power * std::pow(t, power - 1.0) / scale;
    default: return 0.0;
  }
}

EdgeProfile EdgeProfile::unbounded() const {
  EdgeProfile e = *this;
  if (kind == WallKind::Saturating) {
    e.kind = WallKind::PowerLaw;
    e.height = std::numeric_limits<double>::infinity();
  }
  return e;
}

double EdgeProfile::level_crossing(double level) const {
  if (level <= 0.0) return foot;
  switch (kind) {
    case WallKind::Flat: return std::numeric_limits<double>::infinity();
    case WallKind::Exponential: return foot + scale * std::log1p(level / strength);
    case WallKind::Saturating:
      if (level >= height) return std::numeric_limits<double>::infinity();
      [[fallthrough]];
    case WallKind::PowerLaw: return foot + scale * std::pow(level / strength, 1.0 / power);
  }
  return foot;
}

std::string EdgeProfile::name() const {
  switch (kind) {
    case WallKind::Flat: return "flat";
    case WallKind::PowerLaw: return "power";
    case WallKind::Exponential: return "exponential";
    case WallKind::Saturating: return "saturating";
  }
  return "flat";
}

void validate(const EdgeProfile& edge) {
  if (edge.kind == WallKind::Flat) return;
  if (!(edge.strength > 0.0) || !(edge.scale > 0.0))
    fail(ErrorCode::InvalidArgument, "wall strength and scale must be positive");
  if ((edge.kind == WallKind::PowerLaw || edge.kind == WallKind::Saturating) && !(edge.power >= 1.0))
    fail(ErrorCode::InvalidArgument, "wall power must be >= 1");
  if (edge.kind == WallKind::Saturating && !(edge.height > 0.0))
    fail(ErrorCode::InvalidArgument, "wall height must be positive");
}

Grid1D Grid1D::nodal(double lo, double hi, std::size_t n) {
  Grid1D g{lo, hi, n, GridLayout::Nodal};
  validate(g);
  return g;
}

Grid1D Grid1D::radial(double r_max, std::size_t n) {
  Grid1D g{0.0, r_max, n, GridLayout::CellCentered};
  validate(g);
  return g;
}

Grid1D Grid1D::with_spacing(double lo, double hi, double h) {
  if (!(h > 0.0)) fail(ErrorCode::GridMismatch, "spacing must be positive");
  double cells = std::round((hi - lo) / h);
  if (cells < 2.0) fail(ErrorCode::GridMismatch, "grid too coarse");
  return nodal(lo, hi, static_cast<std::size_t>(cells) - 1);
}

double Grid1D::spacing() const {
  if (layout == GridLayout::Nodal) return (hi - lo) / static_cast<double>(n + 1);
  return hi / (static_cast<double>(n) + 0.5);
}

double Grid1D::point(std::size_t i) const {
  double h = spacing();
  if (layout == GridLayout::Nodal) return lo + static_cast<double>(i + 1) * h;
  return (static_cast<double>(i) + 0.5) * h;
}

std::vector<double> Grid1D::points() const {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = point(i);
  return out;
}

void validate(const Grid1D& grid) {
  if (grid.n < 2) fail(ErrorCode::GridMismatch, "grid needs at least two points");
  if (!(grid.hi > grid.lo)) fail(ErrorCode::GridMismatch, "grid needs hi > lo");
  if (grid.layout == GridLayout::CellCentered && grid.lo != 0.0)
    fail(ErrorCode::GridMismatch, "radial grid must start at r = 0");
}

bool domain_deep_enough(const Grid1D& grid, const Units& units, double deepest_center,
                        double depth) {
  return deepest_center - grid.lo >= depth * units.magnetic_length();
}

SpectralWindow SpectralWindow::make(const Units& units, double center, double half_width,
                                    DisorderBounds bounds) {
  return with_gap(center, half_width, units.gap_distance(center), bounds);
}

SpectralWindow SpectralWindow::with_gap(double center, double half_width, double eta,
                                        DisorderBounds bounds) {
  if (!(half_width >= 0.0)) fail(ErrorCode::InvalidArgument, "window half-width must be >= 0");
  if (!(eta > bounds.delta))
    fail(ErrorCode::WindowNotInGap, "gap distance must exceed the disorder bound");
  SpectralWindow w;
  w.center = center;
  w.half_width = half_width;
  w.eta = eta;
  w.disorder = bounds;
  return w;
}

}  // namespace hallsim
