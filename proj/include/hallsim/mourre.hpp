#pragma once

#include <limits>
#include <string>
#include <vector>

#include "hallsim/strip.hpp"
#include "hallsim/transport.hpp"

namespace hallsim {

// j(y) = 1 for y <= b, 1 - S((y - b)/width) on [b, b + width], 0 beyond,
// with the quintic smoothstep S(t) = 6t^5 - 15t^4 + 10t^3.
struct CutoffSpec {
  double b = 0.0;
  double width = 1.0;

  double value(double y) const;
  double d1(double y) const;
  double d2(double y) const;
  double support_end() const { return b + width; }

  // Cutoff that switches off between the wall foot and the point where the
  // wall reaches `level`.
  static CutoffSpec for_wall(const EdgeProfile& edge, double level);
};

struct ConstantsLedger {
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0;
  double D1 = 0.0, D2 = 0.0, D3 = 0.0;
  double lambda = 1.0;
  double alpha_tilde = 0.0;
  double numerator = 0.0;
  // inputs
  double eta = 0.0, eps = 0.0, width = 0.0, delta = 0.0, energy = 0.0;
  CutoffSpec cutoff;
};

double default_epsilon(const SpectralWindow& window);

// Suprema by dense sampling plus golden-section refinement. C1 is taken over
// [b, sup_limit] (default: b + 10 width).
ConstantsLedger constants_ledger(const EdgeProfile& edge, const CutoffSpec& cutoff, const SpectralWindow& window,
                                 double eps, std::size_t samples = 10000,
                                 double sup_limit = std::numeric_limits<double>::quiet_NaN());
// Default epsilon and the wall cutoff at level eps - delta.
ConstantsLedger constants_ledger(const EdgeProfile& edge, const SpectralWindow& window);

// Largest delta with 2 delta (E + |Delta| + delta)^(1/2) < alpha_tilde.
double disorder_threshold(const ConstantsLedger& ledger, double energy, double width);

struct ScalingStudy {
  std::vector<double> scales;
  std::vector<ConstantsLedger> ledgers;
  double slope_C1 = 0.0, slope_C2 = 0.0, slope_C3 = 0.0, slope_C4 = 0.0, slope_alpha = 0.0;
};

ScalingStudy scaling_study(const EdgeProfile& base, const std::vector<double>& scales, const SpectralWindow& window,
                           double eps);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct StatePositivity {
  double energy = 0.0;
  double residual = 0.0;
  double gradient = 0.0;
  double edge_gradient = 0.0;
  double edge_weight = 0.0;
  // discrete <dV/dy> from the commutator, and B * velocity
  double virial_gradient = 0.0;
  double virial_velocity = 0.0;
  double virial_residual = 0.0;
};

struct MourreReport {
  SpectralWindow window;
  double alpha_emp = std::numeric_limits<double>::infinity();
  double alpha_emp_edge = std::numeric_limits<double>::infinity();
  double alpha_min_state = std::numeric_limits<double>::infinity();
  double alpha_tilde = 0.0;
  double delta_threshold = 0.0;
  bool pass = false;
  std::string eta_branch = "landau_gap";
  std::vector<StatePositivity> states;
  std::vector<std::string> warnings;
  ConstantsLedger ledger;
};

// alpha_emp is the smallest eigenvalue of dV/dy projected onto the window
// eigenstates.
MourreReport commutator_positivity(const StripOperator& strip, const SpectralWindow& window,
                                   const ConstantsLedger& ledger, std::size_t max_pairs = 200);

// Saturating wall: eta = min(gap distance, E0 - E); the ledger suprema stop
// where the wall levels off.
MourreReport bounded_wall_positivity(const StripOperator& strip, double center, double half_width,
                                     const DisorderBounds& bounds, std::size_t max_pairs = 200);

struct BoundaryTrace {
  double gamma = 0.0;
  double norm2 = 1.0;
};

BoundaryTrace boundary_gamma(const ChannelHamiltonian& ch, const std::vector<double>& u);
BoundaryTrace boundary_gamma(const StripOperator& strip, const std::vector<cplx>& c);

struct KatoRatios {
  double py = 0.0;
  double kinetic_x = 0.0;
  double pypy = 0.0;
  double bound = 0.0;
  bool holds = true;
};

KatoRatios kato_bounds_check(const ChannelHamiltonian& ch, const std::vector<double>& u, const Units& units,
                             const SpectralWindow& window);
KatoRatios kato_bounds_check(const StripOperator& strip, const std::vector<cplx>& c, const SpectralWindow& window);

}  // namespace hallsim
