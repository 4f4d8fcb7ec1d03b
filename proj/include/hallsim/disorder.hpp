#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hallsim/model.hpp"

namespace hallsim {

// Superposition of Gaussian bumps at Poisson-distributed centres, clipped to
// [-delta, delta]. Sample (ix, iy) lives at x = ix * dx, y = grid.y.point(iy).
//
// Generation, with rng(stream, k) = SplitMix64 counter generator (rng.hpp):
//   centres are drawn in [0, C) x [y_lo - 3l, y_hi + 3l], density 1/l^2;
//   bump count N ~ Poisson(mu) from exponential inter-arrival times, stream 1;
//   bump b draws x, y, amplitude from stream 2 at counters 3b, 3b+1, 3b+2;
//   amplitude = (2u - 1) * delta * sqrt(6/pi) / 3.
class DisorderField {
 public:
  DisorderField() = default;

  const Grid2D& grid() const { return grid_; }
  std::size_t nx() const { return grid_.nx; }
  std::size_t ny() const { return grid_.y.n; }
  double delta() const { return delta_; }
  double correlation_length() const { return corr_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t bump_count() const { return bumps_.size(); }

  double value(std::size_t ix, std::size_t iy) const { return values_[iy * grid_.nx + ix]; }
  double gradient(std::size_t ix, std::size_t iy) const { return dy_[iy * grid_.nx + ix]; }
  double curvature(std::size_t ix, std::size_t iy) const { return dyy_[iy * grid_.nx + ix]; }
  bool clipped(std::size_t ix, std::size_t iy) const { return clipped_[iy * grid_.nx + ix] != 0; }
  const std::vector<double>& values() const { return values_; }

  // Off-grid evaluation; 0: value, 1: d/dy, 2: d2/dy2.
  double evaluate(double x, double y, int derivative = 0) const;

  double sup_abs() const;
  double sup_gradient() const;
  double sup_curvature() const;
  double variance() const;
  double clipped_fraction() const;

  friend DisorderField generate(std::uint64_t seed, double delta, double correlation_length,
                                const Grid2D& grid);

 private:
  struct Bump {
    double x, y, amplitude;
  };
  double raw(double x, double y, int derivative) const;

  Grid2D grid_{1.0, 1, {}};
  double delta_ = 0.0;
  double corr_ = 1.0;
  std::uint64_t seed_ = 0;
  std::vector<Bump> bumps_;
  std::vector<double> values_, dy_, dyy_;
  std::vector<char> clipped_;
};

DisorderField generate(std::uint64_t seed, double delta, double correlation_length,
                       const Grid2D& grid);

// Binary layout: "HALLDF01", u64 nx, u64 ny, f64 delta, f64 corr, u64 seed,
// then nx*ny little-endian f64 values, row-major with x fastest.
struct FieldRecord {
  std::uint64_t nx = 0, ny = 0;
  double delta = 0.0, correlation_length = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> values;
};

void write_field(std::ostream& out, const DisorderField& field);
FieldRecord read_field(std::istream& in);

struct InclusionReport {
  std::size_t eigenvalues = 0;
  std::size_t violations = 0;
  double max_distance = 0.0;
  double max_matched_shift = 0.0;
  double first_inclusion_fraction = 0.0;
};

// Second inclusion (every disordered eigenvalue within delta of the clean
// spectrum), sorted-matching shift, and the fraction of clean eigenvalues
// within eps of a disordered one.
InclusionReport compare_spectra(const std::vector<double>& clean, const std::vector<double>& disordered,
                                double delta, double eps, double slack = 1e-9);

}  // namespace hallsim
