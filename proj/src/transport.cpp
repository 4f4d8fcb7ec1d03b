#include "hallsim/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hallsim/error.hpp"

namespace hallsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double lookup_energy(const FlowTable& table, int n, std::int64_t l, const Flux& flux) {
  if (auto fi = table.flux_index(flux)) return table.at(n, l, *fi).energy;
  // E_{n,l}(Phi + 2 pi) = E_{n,l-1}(Phi)
  for (int shift : {-1, 1}) {
    Flux f = flux;
    f.quanta += shift;
    if (auto fi = table.flux_index(f)) return table.at(n, l + shift, *fi).energy;
  }
  fail(ErrorCode::OutOfTable, "flux not in flow table");
}

double cylinder_radius(const Geometry& geom) {
  auto c = std::get_if<Cylinder>(&geom);
  if (!c) fail(ErrorCode::WrongGeometry, "commutator current needs a cylinder");
  return c->R;
}

// <psi, [V, D] psi> for the central difference D along the grid axis, with
// psi given on rows of `stride` samples.
double commutator_term(const std::vector<cplx>& psi, const std::vector<double>& v, std::size_t stride,
                       std::size_t rows, double h) {
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < rows; ++j)
    for (std::size_t i = 0; i < stride; ++i) {
      std::size_t a = j * stride + i, b = a + stride;
      s -= (std::conj(psi[a]) * psi[b]).real() * (v[b] - v[a]) / h;
    }
  return s;
}

}  // namespace

double edge_current_fh(const FlowTable& table, int n, std::int64_t l, const Flux& flux, double step) {
  if (!(step > 0.0)) fail(ErrorCode::InvalidArgument, "flux step must be positive");
  double q = flux.in_quanta(), dq = step / kTwoPi;
  Flux up = Flux::from_quanta(q + dq);
  Flux down = Flux::from_quanta(q - dq);
  double ep = lookup_energy(table, n, l, up);
  double em = lookup_energy(table, n, l, down);
  return -(ep - em) / (2.0 * step);
}

double edge_current_commutator(const ChannelHamiltonian& ch, const std::vector<double>& u,
                               const Units& units, const EdgeProfile& edge) {
  double R = cylinder_radius(ch.geometry);
  double g = channel_expectation(ch, u, [&](double y) { return wall_gradient(ch.geometry, edge, y); });
  return -g / (kTwoPi * units.B * R);
}

double edge_current_commutator(const StripOperator& strip, const std::vector<cplx>& c) {
  double R = cylinder_radius(strip.geometry);
  double g = strip_expectation(strip, c, strip.gradient_samples(true));
  return -g / (kTwoPi * strip.units.B * R);
}

VirialTerms virial_terms(const ChannelHamiltonian& ch, const std::vector<double>& u, const Units& units,
                         const EdgeProfile& edge) {
  if (std::holds_alternative<Corbino>(ch.geometry))
    fail(ErrorCode::WrongGeometry, "virial decomposition is for straight edges");
  std::size_t n = u.size();
  double h = ch.grid.spacing();
  double B = units.B;
  double norm = 0.0;
  for (double x : u) norm += x * x;

  std::vector<double> hu(n);
  ch.op.apply(u.data(), hu.data());
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double du = ((i + 1 < n ? u[i + 1] : 0.0) - (i > 0 ? u[i - 1] : 0.0)) / (2.0 * h);
    residual += 2.0 * hu[i] * du;
  }

  std::vector<cplx> psi(u.begin(), u.end());
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = wall_potential(ch.geometry, edge, ch.coordinates[i]);
  double potential = commutator_term(psi, v, 1, n, h);

  double momentum = ch.kappa;
  if (auto c = std::get_if<Cylinder>(&ch.geometry)) momentum /= c->R;
  double velocity = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double mid = 0.5 * (ch.coordinates[i] + ch.coordinates[i + 1]);
    velocity += 2.0 * u[i] * u[i + 1] * (momentum + B * mid);
  }

  VirialTerms t;
  t.residual = residual / norm;
  t.potential = potential / norm;
  t.kinetic = t.residual - t.potential;
  t.velocity = velocity / norm;
  t.gradient = channel_expectation(ch, u, [&](double y) { return wall_gradient(ch.geometry, edge, y); });
  return t;
}

VirialTerms virial_terms(const StripOperator& strip, const std::vector<cplx>& c) {
  if (std::holds_alternative<Corbino>(strip.geometry))
    fail(ErrorCode::WrongGeometry, "virial decomposition is for straight edges");
  std::size_t M = strip.channel_count(), N = strip.grid_size();
  double h = strip.grid.spacing();
  double B = strip.units.B;
  double norm = 0.0;
  for (const cplx& x : c) norm += std::norm(x);

  std::vector<cplx> hc = strip.op.apply(c);
  double residual = 0.0;
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t m = 0; m < M; ++m) {
      cplx up = j + 1 < N ? c[(j + 1) * M + m] : cplx(0.0);
      cplx dn = j > 0 ? c[(j - 1) * M + m] : cplx(0.0);
      residual += 2.0 * (std::conj(hc[j * M + m]) * (up - dn)).real() / (2.0 * h);
    }

  std::vector<cplx> psi = strip.to_real_space(c);
  std::vector<double> v(M * N);
  for (std::size_t j = 0; j < N; ++j) {
    double w = wall_potential(strip.geometry, strip.edge, strip.grid.point(j));
    for (std::size_t i = 0; i < M; ++i)
      v[j * M + i] = w + (strip.disorder ? strip.disorder->value(i, j) : 0.0);
  }
  double potential = commutator_term(psi, v, M, N, h);

  double velocity = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    double k = channel_parameter(strip.labels[m], strip.flux) / strip.period_radius;
    for (std::size_t j = 0; j + 1 < N; ++j) {
      double mid = strip.grid.point(j) + 0.5 * h;
      velocity += 2.0 * (std::conj(c[j * M + m]) * c[(j + 1) * M + m]).real() * (k + B * mid);
    }
  }

  VirialTerms t;
  t.residual = residual / norm;
  t.potential = potential / norm;
  t.kinetic = t.residual - t.potential;
  t.velocity = velocity / norm;
  t.gradient = strip_expectation(strip, c, strip.gradient_samples(true));
  return t;
}

double virial_residual(const ChannelHamiltonian& ch, const EigenPair& pair, const Units& units,
                       const EdgeProfile& edge) {
  return std::abs(virial_terms(ch, pair.vector, units, edge).residual);
}

double virial_residual(const StripOperator& strip, const ComplexEigenPair& pair) {
  return std::abs(virial_terms(strip, pair.vector).residual);
}

HallResult hall_conductivity(const FlowTable& table, const Units& units, double mu_l, double mu_r) {
  if (!(mu_l < mu_r)) fail(ErrorCode::InvalidArgument, "need mu_l < mu_r");
  constexpr double gap_tol = 1e-9;
  if (units.gap_distance(mu_l) <= gap_tol || units.gap_distance(mu_r) <= gap_tol)
    fail(ErrorCode::WindowNotInGap, "chemical potentials must lie in gaps");
  if (table.fluxes.empty()) fail(ErrorCode::InvalidArgument, "flow table has no flux nodes");

  std::size_t nodes = table.fluxes.size();
  std::size_t nl = static_cast<std::size_t>(table.l_hi - table.l_lo + 1);
  double vh = mu_r - mu_l;
  auto level = [&](const FlowEntry& e) { return e.mean_position < 0.0 ? mu_l : mu_r; };

  HallResult r;
  r.nodes = nodes;
  double total = 0.0;
  for (std::size_t fi = 0; fi < nodes; ++fi) {
    double node = 0.0;
    for (std::size_t k = 0; k < nl; ++k) {
      std::int64_t l = table.l_lo + static_cast<std::int64_t>(k);
      for (std::size_t n = 0; n < table.bands; ++n) {
        const FlowEntry& e = table.at(static_cast<int>(n), l, fi);
        r.max_residual = std::max(r.max_residual, e.residual);
        if (e.energy >= level(e)) continue;
        if (l == table.l_lo || l == table.l_hi || n + 1 == table.bands)
          fail(ErrorCode::OutOfTable, "flow table does not cover all occupied states");
        node += e.current;
      }
    }
    total += node;
  }
  r.mean_current = total / static_cast<double>(nodes);
  r.sigma = -kTwoPi * r.mean_current / vh;
  r.nu_estimate = std::round(r.sigma);
  r.bias = r.sigma - r.nu_estimate;
  r.error = std::abs(r.bias);

  // Diagnostic: occupation frozen at the first node and carried along by label.
  double fixed = 0.0;
  for (std::size_t k = 0; k < nl; ++k) {
    std::int64_t l = table.l_lo + static_cast<std::int64_t>(k);
    for (std::size_t n = 0; n < table.bands; ++n) {
      if (table.at(static_cast<int>(n), l, 0).energy >= level(table.at(static_cast<int>(n), l, 0))) continue;
      for (std::size_t fi = 0; fi < nodes; ++fi) fixed += table.at(static_cast<int>(n), l, fi).current;
    }
  }
  r.sigma_fixed_labels = -kTwoPi * fixed / static_cast<double>(nodes) / vh;
  return r;
}

HawBounds haw_bounds(const std::vector<StateCurrent>& states, double lo, double hi, double R,
                     double edge_threshold) {
  HawBounds b;
  b.lower = HUGE_VAL;
  b.upper = 0.0;
  int pos = 0, neg = 0;
  for (const StateCurrent& s : states) {
    if (s.energy < lo || s.energy > hi || s.edge_weight <= edge_threshold) continue;
    double v = R * std::abs(s.current);
    b.lower = std::min(b.lower, v);
    b.upper = std::max(b.upper, v);
    ++b.states;
    if (s.current > 0.0) ++pos;
    if (s.current < 0.0) ++neg;
  }
  if (b.states == 0) fail(ErrorCode::NoEdgeStatesInWindow, "no edge states in window");
  b.same_sign = pos == 0 || neg == 0;
  b.sign = neg == 0 ? (pos > 0 ? 1 : 0) : (pos == 0 ? -1 : 0);
  return b;
}

HawBounds haw_bounds(const FlowTable& table, double lo, double hi, double R, double edge_threshold) {
  std::vector<StateCurrent> states;
  states.reserve(table.entries.size());
  for (const FlowEntry& e : table.entries) states.push_back({e.energy, e.current, e.edge_weight});
  return haw_bounds(states, lo, hi, R, edge_threshold);
}

std::vector<StateCurrent> strip_currents(const StripOperator& strip, const std::vector<ComplexEigenPair>& states,
                                         double edge_width) {
  std::vector<double> slope = strip.kappa_derivative();
  std::vector<StateCurrent> out;
  out.reserve(states.size());
  for (const auto& s : states) {
    double d = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < s.vector.size(); ++k) {
      d += std::norm(s.vector[k]) * slope[k];
      norm += std::norm(s.vector[k]);
    }
    out.push_back({s.energy, d / norm / kTwoPi, strip_weight_near_wall(strip, s.vector, edge_width)});
  }
  return out;
}

CorbinoCurrent corbino_current_decomposition(const ChannelHamiltonian& ch, const std::vector<double>& u,
                                             const Units& units, const EdgeProfile& edge) {
  if (!std::holds_alternative<Corbino>(ch.geometry)) fail(ErrorCode::WrongGeometry, "needs a Corbino channel");
  if (ch.grid.layout != GridLayout::CellCentered)
    fail(ErrorCode::GridMismatch, "decomposition needs the conservative radial grid");
  std::size_t n = u.size();
  double h = ch.grid.spacing();
  double B = units.B;
  double norm = 0.0;
  for (double x : u) norm += x * x;

  CorbinoCurrent c;
  std::vector<double> psi(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double r = ch.coordinates[i];
    double p = u[i] * u[i] / norm;
    double w = ch.kappa / r - 0.5 * B * r;
    c.t1 += p * wall_gradient(ch.geometry, edge, r) / r;
    c.t3 += p * w * w / (r * r);
    c.direct += p * w / r;
    psi[i] = u[i] / std::sqrt(norm * r * h);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double mid = ch.coordinates[i] + 0.5 * h;
    double d = psi[i + 1] - psi[i];
    c.t2 += d * d / (h * mid);
  }
  c.t1 /= kTwoPi * B;
  c.t2 /= std::numbers::pi * B;
  c.t3 /= -std::numbers::pi * B;
  c.direct /= std::numbers::pi;
  c.total = c.t1 + c.t2 + c.t3;
  c.relative_error = std::abs(c.total - c.direct) / std::max(std::abs(c.direct), 1e-300);
  return c;
}

}  // namespace hallsim
