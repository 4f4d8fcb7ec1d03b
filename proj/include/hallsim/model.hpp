#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace hallsim {

// hbar = 1, m = 1/2, e = 1 throughout.
struct Units {
  double B;

  explicit Units(double field);

  double magnetic_length() const;
  double cyclotron_energy() const;
  double landau_level(int n) const;
  double landau_level_cyclotron(int n) const;
  // Distance from E to the bulk spectrum {(2n+1)B}.
  double gap_distance(double energy) const;
};

double landau_level(const Units& units, int n);

// Flux through the axis, kept as whole quanta plus a fraction so that a shift
// by one quantum is exact in floating point.
struct Flux {
  std::int64_t quanta = 0;
  double fraction = 0.0;

  static Flux from_phase(double phi);
  static Flux from_quanta(double q);
  double phase() const;
  double in_quanta() const;
  Flux shifted(std::int64_t dq) const;
};

// kappa = l - Phi/2pi
double channel_parameter(std::int64_t l, const Flux& flux);

double corbino_clean_energy(const Units& units, int n, std::int64_t l, const Flux& flux);

// Finite L puts walls at y = +-L/2; infinite L keeps only the upper wall at y = 0.
struct Cylinder {
  double R;
  double L = std::numeric_limits<double>::infinity();
};
struct HalfPlaneEdge {};
struct HalfPlaneDirichlet {};
struct Corbino {
  double R;
};

using Geometry = std::variant<Cylinder, HalfPlaneEdge, HalfPlaneDirichlet, Corbino>;

std::string geometry_name(const Geometry& geom);
void validate(const Geometry& geom);

enum class WallKind { Flat, PowerLaw, Exponential, Saturating };

struct EdgeProfile {
  WallKind kind = WallKind::Flat;
  double strength = 1.0;
  double scale = 1.0;
  double power = 2.0;
  double foot = 0.0;
  double height = std::numeric_limits<double>::infinity();

  static EdgeProfile flat();
  static EdgeProfile power_law(double strength, double scale, double power, double foot = 0.0);
  static EdgeProfile exponential(double strength, double scale, double foot = 0.0);
  static EdgeProfile saturating(double strength, double scale, double power, double height,
                                double foot = 0.0);

  double value(double y) const;
  double derivative(double y) const;
  bool bounded() const { return kind == WallKind::Saturating; }
  // Same foot shape without the saturation.
  EdgeProfile unbounded() const;
  // Position where the wall reaches the given height (foot if height <= 0).
  double level_crossing(double level) const;
  std::string name() const;
};

void validate(const EdgeProfile& edge);

class DisorderField;

struct PotentialSpec {
  EdgeProfile edge;
  std::shared_ptr<const DisorderField> disorder;
};

enum class GridLayout { Nodal, CellCentered };

// Nodal: interior points lo + (i+1)h of [lo, hi] with Dirichlet at both ends.
// CellCentered (radial): r_i = (i + 1/2)h on [0, hi] with Dirichlet at hi.
struct Grid1D {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 0;
  GridLayout layout = GridLayout::Nodal;

  static Grid1D nodal(double lo, double hi, std::size_t n);
  static Grid1D radial(double r_max, std::size_t n);
  static Grid1D with_spacing(double lo, double hi, double h);

  double spacing() const;
  double point(std::size_t i) const;
  std::vector<double> points() const;
};

void validate(const Grid1D& grid);

struct Grid2D {
  double circumference;
  std::size_t nx;
  Grid1D y;

  double dx() const { return circumference / static_cast<double>(nx); }
  double x(std::size_t i) const { return dx() * static_cast<double>(i); }
};

// True when the lower end of the grid lies at least `depth` magnetic lengths
// below the given guiding center.
bool domain_deep_enough(const Grid1D& grid, const Units& units, double deepest_center,
                        double depth = 8.0);

struct DisorderBounds {
  double delta = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
};

struct SpectralWindow {
  double center = 0.0;
  double half_width = 0.0;
  double eta = 0.0;
  DisorderBounds disorder;

  static SpectralWindow make(const Units& units, double center, double half_width,
                             DisorderBounds bounds = {});
  // Gap distance supplied by the caller (bounded walls).
  static SpectralWindow with_gap(double center, double half_width, double eta,
                                 DisorderBounds bounds = {});

  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
  double width() const { return 2.0 * half_width; }
};

}  // namespace hallsim
