#pragma once

#include <cstdint>
#include <vector>

#include "hallsim/bands.hpp"
#include "hallsim/strip.hpp"

namespace hallsim {

struct CurrentReport {
  int n = 0;
  std::int64_t l = 0;
  double flux = 0.0;
  double energy = 0.0;
  double current_fh = 0.0;
  double current_commutator = 0.0;
  double discrepancy = 0.0;
  double virial = 0.0;
};

// -(E(Phi + step) - E(Phi - step)) / (2 step); Phi and step in radians.
double edge_current_fh(const FlowTable& table, int n, std::int64_t l, const Flux& flux, double step);

// -<psi, dV/dy psi> / (2 pi B R) for cylinder states.
double edge_current_commutator(const ChannelHamiltonian& ch, const std::vector<double>& u,
                               const Units& units, const EdgeProfile& edge);
double edge_current_commutator(const StripOperator& strip, const std::vector<cplx>& c);

// Terms of <psi, [H, d/dy] psi> with the central-difference d/dy:
// residual = kinetic + potential, kinetic = -B * velocity.
struct VirialTerms {
  double residual = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  // <2 (p_x + B y)> on the staggered grid
  double velocity = 0.0;
  // <dV/dy> with the closed-form derivative
  double gradient = 0.0;
};

VirialTerms virial_terms(const ChannelHamiltonian& ch, const std::vector<double>& u, const Units& units,
                         const EdgeProfile& edge);
VirialTerms virial_terms(const StripOperator& strip, const std::vector<cplx>& c);
double virial_residual(const ChannelHamiltonian& ch, const EigenPair& pair, const Units& units,
                       const EdgeProfile& edge);
double virial_residual(const StripOperator& strip, const ComplexEigenPair& pair);

struct HallResult {
  double sigma = 0.0;
  double nu_estimate = 0.0;
  double error = 0.0;
  double bias = 0.0;
  double mean_current = 0.0;
  double sigma_fixed_labels = 0.0;
  std::size_t nodes = 0;
  double max_residual = 0.0;
};

// Flux average of the total current with occupation set at every node: states
// with <y> < 0 fill up to mu_l, the others up to mu_r. Returns sigma in units e^2/2pi.
HallResult hall_conductivity(const FlowTable& table, const Units& units, double mu_l, double mu_r);

struct StateCurrent {
  double energy = 0.0;
  double current = 0.0;
  double edge_weight = 0.0;
};

struct HawBounds {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t states = 0;
  int sign = 0;
  bool same_sign = true;
};

HawBounds haw_bounds(const std::vector<StateCurrent>& states, double lo, double hi, double R,
                     double edge_threshold = 0.5);
HawBounds haw_bounds(const FlowTable& table, double lo, double hi, double R, double edge_threshold = 0.5);

// Currents of strip eigenstates: -dE/dPhi by Feynman-Hellmann.
std::vector<StateCurrent> strip_currents(const StripOperator& strip, const std::vector<ComplexEigenPair>& states,
                                         double edge_width);

struct CorbinoCurrent {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  double total = 0.0;
  double direct = 0.0;
  double relative_error = 0.0;
};

CorbinoCurrent corbino_current_decomposition(const ChannelHamiltonian& ch, const std::vector<double>& u,
                                             const Units& units, const EdgeProfile& edge);

}  // namespace hallsim
