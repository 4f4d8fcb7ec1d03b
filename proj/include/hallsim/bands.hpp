#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hallsim/linalg.hpp"
#include "hallsim/model.hpp"

namespace hallsim {

// One decoupled channel of an x- or angle-independent problem.
struct ChannelHamiltonian {
  Geometry geometry;
  double kappa = 0.0;
  Grid1D grid;
  TridiagonalOperator op;
  std::vector<double> coordinates;
  std::vector<double> effective_potential;
  double guiding_center = 0.0;
};

// Cylinder: (kappa/R + B y)^2 + V(y) with walls at +-L/2 (or a single wall at 0).
// Half-plane: (kappa + B y)^2 + V0(y); Dirichlet needs grid.hi == 0 and a flat wall.
// Corbino: radial operator in u = sqrt(r) psi. A cell-centred grid gives the
// conservative (flux) form; a nodal grid on [0, r_max] gives the explicit form
// with the (kappa^2 - 1/4)/r^2 term.
ChannelHamiltonian channel_hamiltonian(const Geometry& geom, const Units& units,
                                       const EdgeProfile& edge, double kappa, const Grid1D& grid);
ChannelHamiltonian channel_hamiltonian(const Geometry& geom, const Units& units,
                                       const PotentialSpec& pot, double kappa, const Grid1D& grid);

// Potential of the geometry at a coordinate (y, or r for Corbino).
double wall_potential(const Geometry& geom, const EdgeProfile& edge, double s);
double wall_gradient(const Geometry& geom, const EdgeProfile& edge, double s);
// Distance from a coordinate to the nearest wall foot.
double distance_to_wall(const Geometry& geom, double s);

std::vector<EigenPair> solve_channel(const ChannelHamiltonian& ch, std::size_t count,
                                     const SolverOptions& opts = {});

// <f> for a unit channel eigenvector (the grid measure is absorbed in u).
double channel_expectation(const ChannelHamiltonian& ch, const std::vector<double>& u,
                           const std::function<double(double)>& f);
double channel_weight_near_wall(const ChannelHamiltonian& ch, const std::vector<double>& u,
                                double width);
// dE/dkappa by Feynman-Hellmann on the discrete operator.
double channel_energy_slope(const ChannelHamiltonian& ch, const Units& units,
                            const std::vector<double>& u);

struct DispersionTable {
  std::vector<double> kappa;
  std::size_t bands = 0;
  std::vector<std::vector<double>> energy;
  std::vector<std::vector<double>> residual;
  std::vector<double> guiding_center;
  // band[k][j]: band label of the j-th eigenvalue at kappa[k]
  std::vector<std::vector<int>> band;

  double value(std::size_t k, int band_label) const;
};

DispersionTable dispersion(const Geometry& geom, const Units& units, const EdgeProfile& edge,
                           const std::vector<double>& kappa_grid, const Grid1D& grid,
                           std::size_t n_max, int threads = 1);

struct FlowEntry {
  int n = 0;
  std::int64_t l = 0;
  std::size_t flux_index = 0;
  double kappa = 0.0;
  double energy = 0.0;
  // -dE/dPhi from the exact derivative of the discrete operator
  double current = 0.0;
  double mean_position = 0.0;
  double edge_weight = 0.0;
  double residual = 0.0;
};

struct FlowTable {
  Geometry geometry;
  std::vector<Flux> fluxes;
  std::int64_t l_lo = 0;
  std::int64_t l_hi = 0;
  std::size_t bands = 0;
  std::vector<FlowEntry> entries;

  std::optional<std::size_t> flux_index(const Flux& flux) const;
  const FlowEntry& at(int n, std::int64_t l, std::size_t flux_index) const;
  bool contains(std::int64_t l, const Flux& flux) const;
};

std::vector<Flux> uniform_fluxes(std::size_t nodes, std::int64_t periods = 1);

FlowTable spectral_flow(const Geometry& geom, const Units& units, const EdgeProfile& edge,
                        const Grid1D& grid, const std::vector<Flux>& fluxes, std::int64_t l_lo,
                        std::int64_t l_hi, std::size_t n_max, int threads = 1,
                        double edge_width = 4.0);

// Lowest eigenvalue on grids with spacing h, h/2, h/4 and the fitted order.
struct RefinementStudy {
  std::vector<double> spacing;
  std::vector<double> values;
  double order = 0.0;
  double extrapolated = 0.0;
};

RefinementStudy refine_channel(const Geometry& geom, const Units& units, const EdgeProfile& edge,
                               double kappa, const Grid1D& coarse, int band, int levels = 3);

}  // namespace hallsim
