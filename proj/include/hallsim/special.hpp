#pragma once

namespace hallsim {

double digamma(double x);
double trigamma(double x);
double log_gamma(double x);
double gamma_function(double x);

// Laguerre polynomial L_n(z) by the three-term recurrence.
double laguerre(int n, double z);

// Confluent hypergeometric function of the second kind with b = 1, z > 0.
// Logarithmic series for a < 0, z <= 12; otherwise the integral
// representation, with downward recurrence in a below 1. Laguerre limit at a = -n.
double tricomi_psi(double a, double z);

// Pieces exposed for overlap checks.
double tricomi_psi_series(double a, double z);
double tricomi_psi_integral(double a, double z);

}  // namespace hallsim
