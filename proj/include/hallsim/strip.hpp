#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hallsim/bands.hpp"
#include "hallsim/disorder.hpp"

namespace hallsim {

// Two-dimensional operator on a periodic strip (or Corbino disc) in a mixed
// basis: M consecutive angular channels times the 1D grid. The clean part is
// block diagonal; the disorder field, sampled at M equispaced points along
// the periodic direction, couples channels through its discrete Fourier
// coefficients. Index = iy * M + m.
struct StripOperator {
  Geometry geometry;
  Units units{1.0};
  EdgeProfile edge;
  Grid1D grid;
  std::vector<std::int64_t> labels;
  Flux flux;
  double period_radius = 1.0;
  std::vector<ChannelHamiltonian> channels;
  std::shared_ptr<const DisorderField> disorder;
  BandedHermitian op;

  std::size_t channel_count() const { return labels.size(); }
  std::size_t grid_size() const { return grid.n; }
  std::size_t dimension() const { return labels.size() * grid.n; }
  double circumference() const;

  // psi(x_i, y_j) at index j * M + i for unit channel-basis vectors.
  std::vector<cplx> to_real_space(const std::vector<cplx>& c) const;
  std::vector<double> density(const std::vector<cplx>& c) const;
  // d/dy of the full potential at the real-space samples.
  std::vector<double> gradient_samples(bool with_disorder = true) const;
  // dH/dkappa per basis index, so that dE/dkappa = <psi, diag psi>.
  std::vector<double> kappa_derivative() const;
};

std::vector<std::int64_t> consecutive_labels(std::int64_t first, std::size_t count);

// Channels whose guiding centres lie in [y_lo, y_hi] for a cylinder of radius R.
std::vector<std::int64_t> labels_for_centres(const Units& units, double R, double y_lo, double y_hi,
                                             const Flux& flux = {});

// For half-plane geometries `period_radius` sets the x-period 2 pi R and
// momenta k = (l - Phi/2pi)/R; cylinder and Corbino take it from the geometry.
StripOperator build_strip(const Geometry& geom, const Units& units, const EdgeProfile& edge,
                          const Grid1D& grid, const std::vector<std::int64_t>& labels,
                          const Flux& flux = {}, std::shared_ptr<const DisorderField> disorder = nullptr,
                          double period_radius = 0.0);

Grid2D strip_sample_grid(const StripOperator& strip);

double strip_expectation(const StripOperator& strip, const std::vector<cplx>& c,
                         const std::vector<double>& samples);

// Matrix of a real-space multiplication operator in the span of the given states.
Eigen::MatrixXcd strip_projection(const StripOperator& strip, const std::vector<ComplexEigenPair>& states,
                                  const std::vector<double>& samples);

// Weight of a state within `width` of the wall foot.
double strip_weight_near_wall(const StripOperator& strip, const std::vector<cplx>& c, double width);

// Window eigenpairs; dense below `dense_limit` unknowns, shift-invert Lanczos above.
std::vector<ComplexEigenPair> strip_window(const StripOperator& strip, double lo, double hi,
                                           std::size_t max_pairs = 200, std::size_t dense_limit = 1600);

}  // namespace hallsim
