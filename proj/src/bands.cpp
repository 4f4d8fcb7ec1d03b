#include "hallsim/bands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hallsim/error.hpp"
#include "hallsim/parallel.hpp"

namespace hallsim {

double wall_potential(const Geometry& geom, const EdgeProfile& edge, double s) {
  if (auto c = std::get_if<Cylinder>(&geom)) {
    if (std::isinf(c->L)) return edge.value(s);
    return edge.value(s - 0.5 * c->L) + edge.value(-s - 0.5 * c->L);
  }
  if (auto k = std::get_if<Corbino>(&geom)) return edge.value(s - k->R);
  return edge.value(s);
}

double wall_gradient(const Geometry& geom, const EdgeProfile& edge, double s) {
  if (auto c = std::get_if<Cylinder>(&geom)) {
    if (std::isinf(c->L)) return edge.derivative(s);
    return edge.derivative(s - 0.5 * c->L) - edge.derivative(-s - 0.5 * c->L);
  }
  if (auto k = std::get_if<Corbino>(&geom)) return edge.derivative(s - k->R);
  return edge.derivative(s);
}

double distance_to_wall(const Geometry& geom, double s) {
  if (auto c = std::get_if<Cylinder>(&geom)) {
    if (std::isinf(c->L)) return std::abs(s);
    return std::min(std::abs(s - 0.5 * c->L), std::abs(s + 0.5 * c->L));
  }
  if (auto k = std::get_if<Corbino>(&geom)) return std::abs(s - k->R);
  return std::abs(s);
}

ChannelHamiltonian channel_hamiltonian(const Geometry& geom, const Units& units,
                                       const EdgeProfile& edge, double kappa, const Grid1D& grid) {
  validate(geom);
  validate(edge);
  validate(grid);
  bool corbino = std::holds_alternative<Corbino>(geom);
  if (!corbino && grid.layout != GridLayout::Nodal)
    fail(ErrorCode::GridMismatch, "only the Corbino geometry uses a radial grid");
  if (corbino && grid.lo != 0.0) fail(ErrorCode::GridMismatch, "Corbino grid must start at r = 0");
  if (std::holds_alternative<HalfPlaneDirichlet>(geom) && grid.hi != 0.0)
    fail(ErrorCode::GridMismatch, "Dirichlet grid must end at y = 0");

  ChannelHamiltonian ch;
  ch.geometry = geom;
  ch.kappa = kappa;
  ch.grid = grid;
  ch.coordinates = grid.points();
  std::size_t n = grid.n;
  double h = grid.spacing();
  double B = units.B;
  ch.effective_potential.resize(n);
  ch.op.diag.resize(n);
  ch.op.off.assign(n - 1, -1.0 / (h * h));

  if (corbino) {
    ch.guiding_center = std::sqrt(2.0 * std::abs(kappa) / B);
    bool conservative = grid.layout == GridLayout::CellCentered;
    for (std::size_t i = 0; i < n; ++i) {
      double r = ch.coordinates[i];
      double w = kappa / r - 0.5 * B * r;
      double v = wall_potential(geom, edge, r);
      ch.effective_potential[i] = w * w + v;
      if (conservative) {
        ch.op.diag[i] = 2.0 / (h * h) + w * w + v;
      } else {
        ch.op.diag[i] = 2.0 / (h * h) + (kappa * kappa - 0.25) / (r * r) - B * kappa +
                        0.25 * B * B * r * r + v;
      }
    }
    if (conservative) {
      for (std::size_t i = 0; i + 1 < n; ++i) {
        double r0 = ch.coordinates[i], r1 = ch.coordinates[i + 1];
        ch.op.off[i] = -0.5 * (r0 + r1) / (h * h * std::sqrt(r0 * r1));
      }
    }
    return ch;
  }

  double momentum = kappa;
  if (auto c = std::get_if<Cylinder>(&geom)) momentum = kappa / c->R;
  ch.guiding_center = -momentum / B;
  for (std::size_t i = 0; i < n; ++i) {
    double y = ch.coordinates[i];
    double m = momentum + B * y;
    double v = wall_potential(geom, edge, y);
    ch.effective_potential[i] = m * m + v;
    ch.op.diag[i] = 2.0 / (h * h) + m * m + v;
  }
  return ch;
}

ChannelHamiltonian channel_hamiltonian(const Geometry& geom, const Units& units,
                                       const PotentialSpec& pot, double kappa, const Grid1D& grid) {
  if (pot.disorder) fail(ErrorCode::InvalidArgument, "channel operators need an x-independent potential");
  return channel_hamiltonian(geom, units, pot.edge, kappa, grid);
}

std::vector<EigenPair> solve_channel(const ChannelHamiltonian& ch, std::size_t count,
                                     const SolverOptions& opts) {
  return eig_tridiagonal_lowest(ch.op, count, opts);
}

double channel_expectation(const ChannelHamiltonian& ch, const std::vector<double>& u,
                           const std::function<double(double)>& f) {
  double s = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    s += u[i] * u[i] * f(ch.coordinates[i]);
    norm += u[i] * u[i];
  }
  return s / norm;
}

double channel_weight_near_wall(const ChannelHamiltonian& ch, const std::vector<double>& u,
                                double width) {
  return channel_expectation(ch, u, [&](double s) {
    return distance_to_wall(ch.geometry, s) <= width ? 1.0 : 0.0;
  });
}

double channel_energy_slope(const ChannelHamiltonian& ch, const Units& units,
                            const std::vector<double>& u) {
  double B = units.B;
  double kappa = ch.kappa;
  if (std::holds_alternative<Corbino>(ch.geometry))
    return channel_expectation(ch, u, [&](double r) { return 2.0 * (kappa / r - 0.5 * B * r) / r; });
  double R = 1.0;
  if (auto c = std::get_if<Cylinder>(&ch.geometry)) R = c->R;
  return channel_expectation(ch, u, [&](double y) { return 2.0 * (kappa / R + B * y) / R; });
}

double DispersionTable::value(std::size_t k, int band_label) const {
  for (std::size_t j = 0; j < band[k].size(); ++j)
    if (band[k][j] == band_label) return energy[k][j];
  fail(ErrorCode::OutOfTable, "band label not present");
}

DispersionTable dispersion(const Geometry& geom, const Units& units, const EdgeProfile& edge,
                           const std::vector<double>& kappa_grid, const Grid1D& grid,
                           std::size_t n_max, int threads) {
  if (!std::is_sorted(kappa_grid.begin(), kappa_grid.end()))
    fail(ErrorCode::InvalidArgument, "kappa grid must be sorted");
  std::size_t nk = kappa_grid.size();
  DispersionTable t;
  t.kappa = kappa_grid;
  t.bands = n_max;
  t.energy.resize(nk);
  t.residual.resize(nk);
  t.guiding_center.resize(nk);
  t.band.resize(nk);
  std::vector<std::vector<std::vector<double>>> vecs(nk);
  parallel_for(nk, threads, [&](std::size_t k) {
    ChannelHamiltonian ch = channel_hamiltonian(geom, units, edge, kappa_grid[k], grid);
    auto pairs = solve_channel(ch, n_max);
    t.guiding_center[k] = ch.guiding_center;
    for (auto& p : pairs) {
      t.energy[k].push_back(p.energy);
      t.residual[k].push_back(p.residual);
      vecs[k].push_back(std::move(p.vector));
    }
  });

  // Continuity tracking: nearest energy, ties broken by eigenvector overlap.
  for (std::size_t k = 0; k < nk; ++k) {
    std::size_t m = t.energy[k].size();
    t.band[k].assign(m, -1);
    if (k == 0) {
      for (std::size_t j = 0; j < m; ++j) t.band[k][j] = static_cast<int>(j);
      continue;
    }
    std::vector<char> taken(t.energy[k - 1].size(), 0);
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t best = 0;
      double best_d = HUGE_VAL, best_o = -1.0;
      for (std::size_t i = 0; i < t.energy[k - 1].size(); ++i) {
        if (taken[i]) continue;
        double d = std::abs(t.energy[k][j] - t.energy[k - 1][i]);
        double o = 0.0;
        for (std::size_t q = 0; q < vecs[k][j].size(); ++q) o += vecs[k][j][q] * vecs[k - 1][i][q];
        o = std::abs(o);
        bool tie = std::abs(d - best_d) <= 1e-10 * std::max(1.0, d);
        if ((tie && o > best_o) || (!tie && d < best_d)) {
          best = i;
          best_d = d;
          best_o = o;
        }
      }
      if (best_d < HUGE_VAL) {
        taken[best] = 1;
        t.band[k][j] = t.band[k - 1][best];
      }
    }
  }
  return t;
}

std::optional<std::size_t> FlowTable::flux_index(const Flux& flux) const {
  for (std::size_t i = 0; i < fluxes.size(); ++i)
    if (std::abs(fluxes[i].in_quanta() - flux.in_quanta()) <= 1e-12) return i;
  return std::nullopt;
}

const FlowEntry& FlowTable::at(int n, std::int64_t l, std::size_t fi) const {
  if (l < l_lo || l > l_hi || n < 0 || static_cast<std::size_t>(n) >= bands || fi >= fluxes.size())
    fail(ErrorCode::OutOfTable, "state not in flow table");
  std::size_t nl = static_cast<std::size_t>(l_hi - l_lo + 1);
  std::size_t idx = (fi * nl + static_cast<std::size_t>(l - l_lo)) * bands + static_cast<std::size_t>(n);
  return entries[idx];
}

bool FlowTable::contains(std::int64_t l, const Flux& flux) const {
  return l >= l_lo && l <= l_hi && flux_index(flux).has_value();
}

std::vector<Flux> uniform_fluxes(std::size_t nodes, std::int64_t periods) {
  std::vector<Flux> out;
  std::size_t total = nodes * static_cast<std::size_t>(periods);
  for (std::size_t i = 0; i < total; ++i) {
    Flux f;
    f.quanta = static_cast<std::int64_t>(i / nodes);
    f.fraction = static_cast<double>(i % nodes) / static_cast<double>(nodes);
    out.push_back(f);
  }
  return out;
}

FlowTable spectral_flow(const Geometry& geom, const Units& units, const EdgeProfile& edge,
                        const Grid1D& grid, const std::vector<Flux>& fluxes, std::int64_t l_lo,
                        std::int64_t l_hi, std::size_t n_max, int threads, double edge_width) {
  if (!std::holds_alternative<Cylinder>(geom) && !std::holds_alternative<Corbino>(geom))
    fail(ErrorCode::WrongGeometry, "spectral flow needs a cylinder or Corbino geometry");
  if (l_hi < l_lo) fail(ErrorCode::InvalidArgument, "empty angular momentum range");
  FlowTable t;
  t.geometry = geom;
  t.fluxes = fluxes;
  t.l_lo = l_lo;
  t.l_hi = l_hi;
  t.bands = n_max;
  std::size_t nl = static_cast<std::size_t>(l_hi - l_lo + 1);
  t.entries.resize(fluxes.size() * nl * n_max);
  double width = edge_width * units.magnetic_length();
  parallel_for(fluxes.size() * nl, threads, [&](std::size_t job) {
    std::size_t fi = job / nl;
    std::int64_t l = l_lo + static_cast<std::int64_t>(job % nl);
    double kappa = channel_parameter(l, fluxes[fi]);
    ChannelHamiltonian ch = channel_hamiltonian(geom, units, edge, kappa, grid);
    auto pairs = solve_channel(ch, n_max);
    for (std::size_t n = 0; n < pairs.size(); ++n) {
      FlowEntry& e = t.entries[job * n_max + n];
      e.n = static_cast<int>(n);
      e.l = l;
      e.flux_index = fi;
      e.kappa = kappa;
      e.energy = pairs[n].energy;
      e.residual = pairs[n].residual;
      e.current = channel_energy_slope(ch, units, pairs[n].vector) / (2.0 * std::numbers::pi);
      e.mean_position = channel_expectation(ch, pairs[n].vector, [](double s) { return s; });
      e.edge_weight = channel_weight_near_wall(ch, pairs[n].vector, width);
    }
  });
  return t;
}

RefinementStudy refine_channel(const Geometry& geom, const Units& units, const EdgeProfile& edge,
                               double kappa, const Grid1D& coarse, int band, int levels) {
  if (coarse.layout != GridLayout::Nodal) fail(ErrorCode::GridMismatch, "refinement needs a nodal grid");
  RefinementStudy s;
  Grid1D g = coarse;
  for (int i = 0; i < levels; ++i) {
    ChannelHamiltonian ch = channel_hamiltonian(geom, units, edge, kappa, g);
    auto pairs = eig_tridiagonal_range(ch.op, static_cast<std::size_t>(band), 1);
    s.spacing.push_back(g.spacing());
    s.values.push_back(pairs[0].energy);
    g.n = 2 * g.n + 1;
  }
  std::size_t m = s.values.size();
  if (m >= 3) {
    double d1 = s.values[m - 2] - s.values[m - 3];
    double d2 = s.values[m - 1] - s.values[m - 2];
    s.order = std::log2(std::abs(d1 / d2));
    double f = std::pow(2.0, s.order) - 1.0;
    s.extrapolated = s.values[m - 1] + d2 / f;
  } else {
    s.extrapolated = s.values.back();
  }
  return s;
}

}  // namespace hallsim
