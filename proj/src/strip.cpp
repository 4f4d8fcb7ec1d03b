#include "hallsim/strip.hpp"

#include <cmath>
#include <numbers>

#include "hallsim/error.hpp"

namespace hallsim {

namespace {

std::vector<cplx> phase_table(const std::vector<std::int64_t>& labels) {
  std::size_t M = labels.size();
  std::vector<cplx> t(M * M);
  for (std::size_t m = 0; m < M; ++m) {
    std::int64_t q = ((labels[m] % static_cast<std::int64_t>(M)) + static_cast<std::int64_t>(M)) %
                     static_cast<std::int64_t>(M);
    for (std::size_t i = 0; i < M; ++i) {
      std::size_t k = (static_cast<std::size_t>(q) * i) % M;
      double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(M);
      t[m * M + i] = std::polar(1.0 / std::sqrt(static_cast<double>(M)), a);
    }
  }
  return t;
}

bool same_grid(const Grid1D& a, const Grid1D& b) {
  return a.lo == b.lo && a.hi == b.hi && a.n == b.n && a.layout == b.layout;
}

}  // namespace

double StripOperator::circumference() const { return 2.0 * std::numbers::pi * period_radius; }

std::vector<cplx> StripOperator::to_real_space(const std::vector<cplx>& c) const {
  std::size_t M = channel_count(), N = grid_size();
  std::vector<cplx> table = phase_table(labels);
  std::vector<cplx> out(M * N, cplx(0.0));
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t m = 0; m < M; ++m) {
      cplx a = c[j * M + m];
      if (a == cplx(0.0)) continue;
      for (std::size_t i = 0; i < M; ++i) out[j * M + i] += a * table[m * M + i];
    }
  return out;
}

std::vector<double> StripOperator::density(const std::vector<cplx>& c) const {
  std::vector<cplx> psi = to_real_space(c);
  std::vector<double> d(psi.size());
  for (std::size_t k = 0; k < psi.size(); ++k) d[k] = std::norm(psi[k]);
  return d;
}

std::vector<double> StripOperator::gradient_samples(bool with_disorder) const {
  std::size_t M = channel_count(), N = grid_size();
  std::vector<double> g(M * N);
  for (std::size_t j = 0; j < N; ++j) {
    double w = wall_gradient(geometry, edge, grid.point(j));
    for (std::size_t i = 0; i < M; ++i)
      g[j * M + i] = w + (with_disorder && disorder ? disorder->gradient(i, j) : 0.0);
  }
  return g;
}

std::vector<double> StripOperator::kappa_derivative() const {
  std::size_t M = channel_count(), N = grid_size();
  std::vector<double> d(M * N);
  double B = units.B;
  bool corbino = std::holds_alternative<Corbino>(geometry);
  double R = period_radius;
  for (std::size_t j = 0; j < N; ++j) {
    double s = grid.point(j);
    for (std::size_t m = 0; m < M; ++m) {
      double kappa = channel_parameter(labels[m], flux);
      d[j * M + m] = corbino ? 2.0 * (kappa / s - 0.5 * B * s) / s : 2.0 * (kappa / R + B * s) / R;
    }
  }
  return d;
}

std::vector<std::int64_t> consecutive_labels(std::int64_t first, std::size_t count) {
  std::vector<std::int64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = first + static_cast<std::int64_t>(i);
  return out;
}

std::vector<std::int64_t> labels_for_centres(const Units& units, double R, double y_lo, double y_hi,
                                             const Flux& flux) {
  double shift = flux.in_quanta();
  auto lo = static_cast<std::int64_t>(std::ceil(-units.B * R * y_hi + shift));
  auto hi = static_cast<std::int64_t>(std::floor(-units.B * R * y_lo + shift));
  if (hi < lo) return {};
  return consecutive_labels(lo, static_cast<std::size_t>(hi - lo + 1));
}

StripOperator build_strip(const Geometry& geom, const Units& units, const EdgeProfile& edge,
                          const Grid1D& grid, const std::vector<std::int64_t>& labels, const Flux& flux,
                          std::shared_ptr<const DisorderField> disorder, double period_radius) {
  if (labels.empty()) fail(ErrorCode::InvalidArgument, "strip needs at least one channel");
  StripOperator s;
  s.geometry = geom;
  s.units = units;
  s.edge = edge;
  s.grid = grid;
  s.labels = labels;
  s.flux = flux;
  s.disorder = disorder;
  bool scaled = false;
  if (auto c = std::get_if<Cylinder>(&geom)) {
    s.period_radius = c->R;
  } else if (auto k = std::get_if<Corbino>(&geom)) {
    s.period_radius = k->R;
  } else {
    if (!(period_radius > 0.0)) fail(ErrorCode::InvalidArgument, "half-plane strip needs a period radius");
    s.period_radius = period_radius;
    scaled = true;
  }

  std::size_t M = labels.size(), N = grid.n;
  s.channels.reserve(M);
  for (std::size_t m = 0; m < M; ++m) {
    double kappa = channel_parameter(labels[m], flux);
    s.channels.push_back(channel_hamiltonian(geom, units, edge, scaled ? kappa / s.period_radius : kappa, grid));
  }

  if (disorder) {
    if (disorder->nx() != M || disorder->ny() != N || !same_grid(disorder->grid().y, grid) ||
        std::abs(disorder->grid().circumference - s.circumference()) > 1e-12 * s.circumference())
      fail(ErrorCode::GridMismatch, "disorder field does not match the strip grid");
  }

  s.op = BandedHermitian(M * N, M);
  std::vector<cplx> coeff(M);
  for (std::size_t j = 0; j < N; ++j) {
    if (disorder) {
      for (std::size_t q = 0; q < M; ++q) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
          std::size_t k = (q * i) % M;
          double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(M);
          acc += disorder->value(i, j) * std::polar(1.0, a);
        }
        coeff[q] = acc / static_cast<double>(M);
      }
    }
    for (std::size_t m = 0; m < M; ++m) {
      std::size_t row = j * M + m;
      double d = s.channels[m].op.diag[j] + (disorder ? coeff[0].real() : 0.0);
      s.op.lower(row, row) = d;
      if (j + 1 < N) s.op.lower(row + M, row) = s.channels[m].op.off[j];
      if (!disorder) continue;
      for (std::size_t mp = m + 1; mp < M; ++mp) {
        std::int64_t q = (labels[mp] - labels[m]) % static_cast<std::int64_t>(M);
        if (q < 0) q += static_cast<std::int64_t>(M);
        s.op.lower(j * M + mp, row) = coeff[static_cast<std::size_t>(q)];
      }
    }
  }
  return s;
}

Grid2D strip_sample_grid(const StripOperator& strip) {
  return Grid2D{strip.circumference(), strip.channel_count(), strip.grid};
}

double strip_expectation(const StripOperator& strip, const std::vector<cplx>& c,
                         const std::vector<double>& samples) {
  std::vector<double> d = strip.density(c);
  double s = 0.0, n = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    s += d[k] * samples[k];
    n += d[k];
  }
  return s / n;
}

Eigen::MatrixXcd strip_projection(const StripOperator& strip, const std::vector<ComplexEigenPair>& states,
                                  const std::vector<double>& samples) {
  std::size_t w = states.size();
  std::vector<std::vector<cplx>> psi;
  psi.reserve(w);
  for (const auto& s : states) psi.push_back(strip.to_real_space(s.vector));
  Eigen::MatrixXcd p(w, w);
  for (std::size_t a = 0; a < w; ++a)
    for (std::size_t b = a; b < w; ++b) {
      cplx acc = 0.0;
      for (std::size_t k = 0; k < samples.size(); ++k) acc += std::conj(psi[a][k]) * psi[b][k] * samples[k];
      p(a, b) = acc;
      p(b, a) = std::conj(acc);
    }
  return p;
}

double strip_weight_near_wall(const StripOperator& strip, const std::vector<cplx>& c, double width) {
  std::size_t M = strip.channel_count();
  std::vector<double> mask(strip.dimension());
  for (std::size_t j = 0; j < strip.grid_size(); ++j) {
    double inside = distance_to_wall(strip.geometry, strip.grid.point(j)) <= width ? 1.0 : 0.0;
    for (std::size_t i = 0; i < M; ++i) mask[j * M + i] = inside;
  }
  return strip_expectation(strip, c, mask);
}

std::vector<ComplexEigenPair> strip_window(const StripOperator& strip, double lo, double hi,
                                           std::size_t max_pairs, std::size_t dense_limit) {
  if (strip.dimension() <= dense_limit) return eig_dense_window(strip.op, lo, hi);
  return eig_sparse_window(strip.op, lo, hi, max_pairs);
}

}  // namespace hallsim
