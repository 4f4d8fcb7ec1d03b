#include "hallsim/disorder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

#include "hallsim/error.hpp"
#include "hallsim/rng.hpp"

namespace hallsim {

namespace {

constexpr char kMagic[8] = {'H', 'A', 'L', 'L', 'D', 'F', '0', '1'};

template <class T>
void put(std::ostream& out, T v) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  out.write(reinterpret_cast<const char*>(&bits), 8);
}

template <class T>
T get(std::istream& in) {
  std::uint64_t bits = 0;
  in.read(reinterpret_cast<char*>(&bits), 8);
  if (!in) fail(ErrorCode::InvalidArgument, "truncated disorder field");
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

double DisorderField::raw(double x, double y, int derivative) const {
  double c = grid_.circumference;
  double l2 = corr_ * corr_;
  double cut = 40.0 * l2;
  double s = 0.0;
  for (const Bump& b : bumps_) {
    double dy = y - b.y;
    if (dy * dy > cut) continue;
    double dx0 = x - b.x;
    dx0 -= c * std::floor(dx0 / c + 0.5);
    for (int m = -1; m <= 1; ++m) {
      double dx = dx0 + m * c;
      double r2 = dx * dx + dy * dy;
      if (r2 > cut) continue;
      double g = b.amplitude * std::exp(-r2 / l2);
      if (derivative == 0)
        s += g;
      else if (derivative == 1)
        s += g * (-2.0 * dy / l2);
      else
        s += g * (4.0 * dy * dy / (l2 * l2) - 2.0 / l2);
    }
  }
  return s;
}

double DisorderField::evaluate(double x, double y, int derivative) const {
  double v = raw(x, y, 0);
  if (std::abs(v) > delta_) return derivative == 0 ? std::copysign(delta_, v) : 0.0;
  return derivative == 0 ? v : raw(x, y, derivative);
}

double DisorderField::sup_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double DisorderField::sup_gradient() const {
  double m = 0.0;
  for (double v : dy_) m = std::max(m, std::abs(v));
  return m;
}

double DisorderField::sup_curvature() const {
  double m = 0.0;
  for (double v : dyy_) m = std::max(m, std::abs(v));
  return m;
}

double DisorderField::variance() const {
  if (values_.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values_) mean += v;
  mean /= static_cast<double>(values_.size());
  double s = 0.0;
  for (double v : values_) s += (v - mean) * (v - mean);
  return s / static_cast<double>(values_.size());
}

double DisorderField::clipped_fraction() const {
  if (clipped_.empty()) return 0.0;
  std::size_t c = 0;
  for (char f : clipped_) c += f ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(clipped_.size());
}

DisorderField generate(std::uint64_t seed, double delta, double correlation_length,
                       const Grid2D& grid) {
  if (!(delta >= 0.0)) fail(ErrorCode::InvalidArgument, "disorder bound must be >= 0");
  if (!(correlation_length > 0.0)) fail(ErrorCode::InvalidArgument, "correlation length must be > 0");
  if (grid.nx == 0 || !(grid.circumference > 0.0)) fail(ErrorCode::GridMismatch, "bad disorder grid");
  validate(grid.y);

  DisorderField f;
  f.grid_ = grid;
  f.delta_ = delta;
  f.corr_ = correlation_length;
  f.seed_ = seed;

  double ylo = grid.y.lo - 3.0 * correlation_length;
  double yhi = grid.y.hi + 3.0 * correlation_length;
  double mean_count = grid.circumference * (yhi - ylo) / (correlation_length * correlation_length);

  CounterRng counts(seed, 1);
  std::size_t n = 0;
  double t = 0.0;
  for (;;) {
    t += -std::log1p(-counts.next_uniform()) / mean_count;
    if (t > 1.0) break;
    ++n;
  }

  CounterRng draws(seed, 2);
  double norm = delta * std::sqrt(6.0 / std::numbers::pi) / 3.0;
  f.bumps_.resize(n);
  for (std::size_t b = 0; b < n; ++b) {
    f.bumps_[b].x = draws.uniform(3 * b) * grid.circumference;
    f.bumps_[b].y = ylo + draws.uniform(3 * b + 1) * (yhi - ylo);
    f.bumps_[b].amplitude = (2.0 * draws.uniform(3 * b + 2) - 1.0) * norm;
  }

  std::size_t total = grid.nx * grid.y.n;
  f.values_.resize(total);
  f.dy_.resize(total);
  f.dyy_.resize(total);
  f.clipped_.resize(total);
  for (std::size_t iy = 0; iy < grid.y.n; ++iy) {
    double y = grid.y.point(iy);
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      double x = grid.x(ix);
      std::size_t k = iy * grid.nx + ix;
      double v = f.raw(x, y, 0);
      if (std::abs(v) > delta) {
        f.values_[k] = std::copysign(delta, v);
        f.dy_[k] = 0.0;
        f.dyy_[k] = 0.0;
        f.clipped_[k] = 1;
      } else {
        f.values_[k] = v;
        f.dy_[k] = f.raw(x, y, 1);
        f.dyy_[k] = f.raw(x, y, 2);
        f.clipped_[k] = 0;
      }
    }
  }
  return f;
}

void write_field(std::ostream& out, const DisorderField& field) {
  out.write(kMagic, 8);
  put<std::uint64_t>(out, field.nx());
  put<std::uint64_t>(out, field.ny());
  put<double>(out, field.delta());
  put<double>(out, field.correlation_length());
  put<std::uint64_t>(out, field.seed());
  for (double v : field.values()) put<double>(out, v);
}

FieldRecord read_field(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) fail(ErrorCode::InvalidArgument, "not a disorder field");
  FieldRecord r;
  r.nx = get<std::uint64_t>(in);
  r.ny = get<std::uint64_t>(in);
  r.delta = get<double>(in);
  r.correlation_length = get<double>(in);
  r.seed = get<std::uint64_t>(in);
  r.values.resize(r.nx * r.ny);
  for (auto& v : r.values) v = get<double>(in);
  return r;
}

InclusionReport compare_spectra(const std::vector<double>& clean, const std::vector<double>& disordered,
                                double delta, double eps, double slack) {
  InclusionReport r;
  std::vector<double> c = clean, d = disordered;
  std::sort(c.begin(), c.end());
  std::sort(d.begin(), d.end());
  r.eigenvalues = d.size();
  auto nearest = [](const std::vector<double>& set, double x) {
    auto it = std::lower_bound(set.begin(), set.end(), x);
    double best = HUGE_VAL;
    if (it != set.end()) best = std::min(best, std::abs(*it - x));
    if (it != set.begin()) best = std::min(best, std::abs(*(it - 1) - x));
    return best;
  };
  for (double e : d) {
    double dist = nearest(c, e);
    r.max_distance = std::max(r.max_distance, dist);
    if (dist > delta + slack) ++r.violations;
  }
  std::size_t m = std::min(c.size(), d.size());
  for (std::size_t i = 0; i < m; ++i) r.max_matched_shift = std::max(r.max_matched_shift, std::abs(c[i] - d[i]));
  std::size_t hit = 0;
  for (double e : c)
    if (nearest(d, e) <= eps) ++hit;
  r.first_inclusion_fraction = c.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(c.size());
  return r;
}

}  // namespace hallsim
