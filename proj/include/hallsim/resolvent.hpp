#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "hallsim/bands.hpp"
#include "hallsim/strip.hpp"

namespace hallsim {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct ResolventParams {
  double energy = 0.0;
  double B = 1.0;

  // E = (2 zeta + 1) B
  double zeta() const { return 0.5 * (energy / B - 1.0); }
  // Throws OnLandauLevel when zeta is a nonnegative integer.
  static ResolventParams make(double energy, double B);
};

// (E - H)^-1 kernel for H = (p - A)^2 in the symmetric gauge A = (B/2)(-y, x):
// -(1/4pi) e^{i (B/2)(y1 x2 - x1 y2)} Gamma(-zeta) e^{-B d^2/4} U(-zeta, 1, B d^2/2).
std::complex<double> free_resolvent_kernel(const Point2& x, const Point2& y, const ResolventParams& p);
// Gauge-invariant modulus as a function of the distance.
double kernel_modulus(double distance, const ResolventParams& p);

// Envelope C e^{-d/xi} (1 + |ln(d/xi)|).
struct EnvelopeFit {
  double C = 0.0;
  double xi = 0.0;
  std::size_t violations = 0;
  double mean_log_gap = 0.0;
};

double envelope_value(double distance, const EnvelopeFit& fit);

// For each trial xi the smallest dominating C; keeps the xi with the
// tightest envelope in mean log-gap.
EnvelopeFit decay_bound_check(const ResolventParams& p, const std::vector<double>& distances);

struct DecayFit {
  double lambda = 0.0;
  double C = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  double residual = 0.0;
  std::size_t points = 0;
};

// Log-linear fit of max over angle |psi(r)| against R - r on r in [a/2, a].
DecayFit eigenfunction_decay_fit(const ChannelHamiltonian& ch, const std::vector<double>& u, double a, double R);
DecayFit eigenfunction_decay_fit(const StripOperator& strip, const std::vector<cplx>& c, double a, double R);

struct NeumannTail {
  double integral = 0.0;
  double ratio = 0.0;
  double series_bound = 0.0;
  bool converges = true;
};

// int_{R^2} e^{-2|w|/(3 xi)} ln^2(|w|/xi) dw by adaptive radial quadrature.
double log_weight_integral(double xi);
NeumannTail neumann_tail(double delta, double xi, double C = 1.0);

}  // namespace hallsim
