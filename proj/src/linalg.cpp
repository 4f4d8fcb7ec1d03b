#include "hallsim/linalg.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <memory>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "hallsim/error.hpp"
#include "hallsim/rng.hpp"

namespace hallsim {

namespace {

constexpr double kEps = DBL_EPSILON;

double pivot_floor(const TridiagonalOperator& op) {
  double emax = 1.0;
  for (double e : op.off) emax = std::max(emax, e * e);
  return emax * DBL_MIN;
}

void gershgorin(const TridiagonalOperator& op, double& lo, double& hi) {
  std::size_t n = op.size();
  lo = HUGE_VAL;
  hi = -HUGE_VAL;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(op.off[i - 1]);
    if (i + 1 < n) r += std::abs(op.off[i]);
    lo = std::min(lo, op.diag[i] - r);
    hi = std::max(hi, op.diag[i] + r);
  }
  double pad = 2.0 * kEps * std::max(std::abs(lo), std::abs(hi)) + 1e-300;
  lo -= pad;
  hi += pad;
}

// LU of a shifted tridiagonal matrix with partial pivoting (dgttrf layout).
struct TridiagonalLU {
  std::vector<double> dl, d, du, du2;
  std::vector<char> swapped;

  TridiagonalLU(const TridiagonalOperator& op, double shift, double floor) {
    std::size_t n = op.size();
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = op.diag[i] - shift;
    dl = op.off;
    du = op.off;
    du2.assign(n > 2 ? n - 2 : 0, 0.0);
    swapped.assign(n, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = floor;
        double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        double temp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = temp - fact * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        swapped[i] = 1;
      }
    }
    for (double& p : d)
      if (p == 0.0) p = floor;
  }

  void solve(std::vector<double>& b) const {
    std::size_t n = d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!swapped[i]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl[i] * b[i];
      }
    }
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t k = n; k-- > 2;) {
      std::size_t i = k - 2;
      b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void scale_to_unit(std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0) return;
  for (double& x : v) x /= m;
  double nrm = std::sqrt(dot(v, v));
  for (double& x : v) x /= nrm;
}

}  // namespace

void TridiagonalOperator::apply(const double* x, double* y) const {
  std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
}

double TridiagonalOperator::norm_inf() const {
  std::size_t n = size();
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = std::abs(diag[i]);
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < n) r += std::abs(off[i]);
    m = std::max(m, r);
  }
  return m;
}

std::size_t sturm_count(const TridiagonalOperator& op, double x) {
  std::size_t n = op.size();
  if (n == 0) return 0;
  double floor = pivot_floor(op);
  std::size_t count = 0;
  double q = op.diag[0] - x;
  for (std::size_t i = 0;;) {
    if (std::abs(q) < floor) q = -floor;
    if (q < 0.0) ++count;
    if (++i == n) break;
    q = op.diag[i] - x - op.off[i - 1] * op.off[i - 1] / q;
  }
  return count;
}

std::vector<double> tridiagonal_eigenvalues(const TridiagonalOperator& op, std::size_t first,
                                            std::size_t count) {
  std::size_t n = op.size();
  if (first + count > n) fail(ErrorCode::InvalidArgument, "eigenvalue index out of range");
  double glo, ghi;
  gershgorin(op, glo, ghi);
  double floor = pivot_floor(op);
  std::vector<double> out(count);
  double lo_hint = glo;
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t idx = first + k;
    double lo = lo_hint, hi = ghi;
    for (int it = 0; it < 200; ++it) {
      double tol = 2.0 * kEps * std::max(std::abs(lo), std::abs(hi)) + floor;
      if (hi - lo <= tol) break;
      double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (sturm_count(op, mid) > idx)
        hi = mid;
      else
        lo = mid;
    }
    out[k] = 0.5 * (lo + hi);
    lo_hint = lo;
  }
  return out;
}

double residual_norm(const TridiagonalOperator& op, double energy, const std::vector<double>& v) {
  std::vector<double> r(v.size());
  op.apply(v.data(), r.data());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double t = r[i] - energy * v[i];
    s += t * t;
  }
  return std::sqrt(s / dot(v, v));
}

std::vector<EigenPair> eig_tridiagonal_range(const TridiagonalOperator& op, std::size_t first,
                                             std::size_t count, const SolverOptions& opts) {
  std::vector<double> values = tridiagonal_eigenvalues(op, first, count);
  std::size_t n = op.size();
  double scale = std::max(1.0, op.norm_inf());
  double tol = std::max(opts.tolerance, 64.0 * kEps * scale);
  double floor = kEps * scale;
  std::vector<EigenPair> out;
  out.reserve(count);
  std::vector<double> tmp(n);
  std::size_t cluster_start = 0;
  double prev_shift = -HUGE_VAL;
  for (std::size_t k = 0; k < count; ++k) {
    double lambda = values[k];
    double sep = 1e-10 * std::max(1.0, std::abs(lambda));
    if (k > 0 && lambda - values[k - 1] >= sep) cluster_start = k;
    double shift = lambda;
    if (k > cluster_start && shift <= prev_shift) shift = prev_shift + 10.0 * kEps * std::max(1.0, std::abs(shift));
    prev_shift = shift;
    TridiagonalLU lu(op, shift, floor);

    CounterRng rng(opts.seed, first + k);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.next_uniform() - 0.5;

    bool converged = false;
    int extra = 0;
    double rq = lambda;
    for (int it = 0; it < opts.max_iterations; ++it) {
      scale_to_unit(x);
      lu.solve(x);
      for (std::size_t j = cluster_start; j < k; ++j) {
        double c = dot(out[j].vector, x);
        for (std::size_t i = 0; i < n; ++i) x[i] -= c * out[j].vector[i];
      }
      scale_to_unit(x);
      op.apply(x.data(), tmp.data());
      rq = dot(x, tmp);
      double r = 0.0;
      for (std::size_t i = 0; i < n; ++i) r += (tmp[i] - rq * x[i]) * (tmp[i] - rq * x[i]);
      r = std::sqrt(r);
      if (converged) {
        if (++extra >= opts.polish) break;
      } else if (r <= tol) {
        converged = true;
        if (opts.polish == 0) break;
      }
    }
    if (!converged)
      fail(ErrorCode::NonConvergence, "inverse iteration did not converge", static_cast<long>(first + k));
    // Fix the sign so that the largest component is positive.
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(x[i]) > std::abs(x[imax])) imax = i;
    if (x[imax] < 0.0)
      for (auto& v : x) v = -v;
    EigenPair p;
    p.energy = rq;
    p.residual = residual_norm(op, rq, x);
    p.norm = std::sqrt(dot(x, x));
    p.vector = std::move(x);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<EigenPair> eig_tridiagonal_lowest(const TridiagonalOperator& op, std::size_t count,
                                              const SolverOptions& opts) {
  return eig_tridiagonal_range(op, 0, std::min(count, op.size()), opts);
}

std::vector<EigenPair> eig_tridiagonal_window(const TridiagonalOperator& op, double lo, double hi,
                                              const SolverOptions& opts) {
  if (!(lo < hi)) fail(ErrorCode::InvalidArgument, "window needs lo < hi");
  std::size_t a = sturm_count(op, lo);
  std::size_t b = sturm_count(op, hi);
  auto out = eig_tridiagonal_range(op, a, b - a, opts);
  if (out.size() != b - a) fail(ErrorCode::NonConvergence, "window count mismatch");
  return out;
}

BandedHermitian::BandedHermitian(std::size_t n, std::size_t kd)
    : n_(n), kd_(kd), band_(n * (kd + 1), cplx(0.0)) {}

cplx BandedHermitian::at(std::size_t i, std::size_t j) const {
  if (i >= j) return i - j <= kd_ ? lower(i, j) : cplx(0.0);
  return j - i <= kd_ ? std::conj(lower(j, i)) : cplx(0.0);
}

void BandedHermitian::apply(const cplx* x, cplx* y) const {
  for (std::size_t i = 0; i < n_; ++i) y[i] = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    const cplx* col = &band_[j * (kd_ + 1)];
    y[j] += col[0].real() * x[j];
    std::size_t m = std::min(kd_, n_ - 1 - j);
    for (std::size_t d = 1; d <= m; ++d) {
      y[j + d] += col[d] * x[j];
      y[j] += std::conj(col[d]) * x[j + d];
    }
  }
}

std::vector<cplx> BandedHermitian::apply(const std::vector<cplx>& x) const {
  std::vector<cplx> y(n_);
  apply(x.data(), y.data());
  return y;
}

Eigen::MatrixXcd BandedHermitian::dense() const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_, n_);
  for (std::size_t j = 0; j < n_; ++j) {
    m(j, j) = lower(j, j).real();
    for (std::size_t i = j + 1; i <= std::min(n_ - 1, j + kd_); ++i) {
      m(i, j) = lower(i, j);
      m(j, i) = std::conj(lower(i, j));
    }
  }
  return m;
}

double BandedHermitian::norm_inf() const {
  std::vector<double> rows(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    rows[j] += std::abs(lower(j, j));
    for (std::size_t i = j + 1; i <= std::min(n_ - 1, j + kd_); ++i) {
      double a = std::abs(lower(i, j));
      rows[i] += a;
      rows[j] += a;
    }
  }
  double m = 0.0;
  for (double r : rows) m = std::max(m, r);
  return m;
}

std::size_t inertia_below(const BandedHermitian& op, double sigma) {
  std::size_t n = op.size(), kd = op.bandwidth();
  BandedHermitian w = op;
  double floor = kEps * std::max(1.0, op.norm_inf());
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = w.lower(j, j).real() - sigma;
    if (std::abs(d) < floor) d = -floor;
    if (d < 0.0) ++count;
    std::size_t last = std::min(n - 1, j + kd);
    for (std::size_t k = j + 1; k <= last; ++k) {
      cplx lkj = w.lower(k, j);
      if (lkj == cplx(0.0)) continue;
      cplx f = std::conj(lkj) / d;
      for (std::size_t i = k; i <= last; ++i) w.lower(i, k) -= w.lower(i, j) * f;
    }
  }
  return count;
}

double residual_norm(const BandedHermitian& op, double energy, const std::vector<cplx>& v) {
  std::vector<cplx> r = op.apply(v);
  double s = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += std::norm(r[i] - energy * v[i]);
    nv += std::norm(v[i]);
  }
  return std::sqrt(s / nv);
}

namespace {

class ShiftedBandSolver {
 public:
  ShiftedBandSolver(const BandedHermitian& op, double shift) : n_(op.size()), kd_(op.bandwidth()) {
    ldab_ = 3 * kd_ + 1;
    ab_.assign(ldab_ * n_, cplx(0.0));
    ipiv_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      std::size_t i0 = j > kd_ ? j - kd_ : 0;
      std::size_t i1 = std::min(n_ - 1, j + kd_);
      for (std::size_t i = i0; i <= i1; ++i) {
        cplx v = op.at(i, j);
        if (i == j) v -= shift;
        ab_[j * ldab_ + (2 * kd_ + i - j)] = v;
      }
    }
    lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(n_), static_cast<lapack_int>(n_),
                                     static_cast<lapack_int>(kd_), static_cast<lapack_int>(kd_), ab_.data(),
                                     static_cast<lapack_int>(ldab_), ipiv_.data());
    singular_ = info != 0;
  }

  bool singular() const { return singular_; }

  void solve(Eigen::VectorXcd& b) const {
    LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(n_), static_cast<lapack_int>(kd_),
                   static_cast<lapack_int>(kd_), 1, ab_.data(), static_cast<lapack_int>(ldab_), ipiv_.data(),
                   b.data(), static_cast<lapack_int>(n_));
  }

 private:
  std::size_t n_, kd_, ldab_;
  std::vector<cplx> ab_;
  std::vector<lapack_int> ipiv_;
  bool singular_ = false;
};

Eigen::VectorXcd random_vector(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  Eigen::VectorXcd v(n);
  for (std::size_t i = 0; i < n; ++i) {
    double re = rng.next_uniform() - 0.5;
    double im = rng.next_uniform() - 0.5;
    v(i) = cplx(re, im);
  }
  return v;
}

void project_out(Eigen::VectorXcd& w, const std::vector<Eigen::VectorXcd>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) w -= q * q.dot(w);
}

ComplexEigenPair pair_from_vector(const BandedHermitian& op, const Eigen::VectorXcd& y) {
  ComplexEigenPair p;
  p.vector.assign(y.data(), y.data() + y.size());
  std::vector<cplx> ay = op.apply(p.vector);
  cplx rq = 0.0;
  for (std::size_t i = 0; i < ay.size(); ++i) rq += std::conj(p.vector[i]) * ay[i];
  p.energy = rq.real();
  double s = 0.0;
  for (std::size_t i = 0; i < ay.size(); ++i) s += std::norm(ay[i] - p.energy * p.vector[i]);
  p.residual = std::sqrt(s);
  p.norm = y.norm();
  return p;
}

}  // namespace

std::vector<ComplexEigenPair> eig_sparse_window(const BandedHermitian& op, double lo, double hi,
                                                std::size_t max_pairs, const SparseOptions& opts) {
  if (!(lo < hi)) fail(ErrorCode::InvalidArgument, "window needs lo < hi");
  std::size_t n = op.size();
  std::size_t below_lo = inertia_below(op, lo);
  std::size_t below_hi = inertia_below(op, hi);
  std::size_t target = below_hi > below_lo ? below_hi - below_lo : 0;
  if (target == 0) return {};
  if (target > max_pairs)
    fail(ErrorCode::TooManyEigenvalues, "window holds " + std::to_string(target) + " eigenvalues");

  double sigma = 0.5 * (lo + hi);
  std::unique_ptr<ShiftedBandSolver> solver;
  for (int attempt = 0; attempt < 4; ++attempt) {
    solver = std::make_unique<ShiftedBandSolver>(op, sigma);
    if (!solver->singular()) break;
    sigma += (attempt % 2 == 0 ? 1.0 : -2.0) * 1e-3 * (hi - lo) * (attempt + 1);
    solver.reset();
  }
  if (!solver) fail(ErrorCode::FactorizationSingular, "shift hits an eigenvalue");

  double norm_a = std::max(1.0, op.norm_inf() + std::abs(sigma));
  std::vector<Eigen::VectorXcd> locked;
  std::vector<ComplexEigenPair> found;

  for (int restart = 0; restart < opts.max_restarts && found.size() < target; ++restart) {
    std::size_t remaining = target - found.size();
    std::size_t m_max = std::min(n - locked.size(), std::max<std::size_t>(2 * remaining + 40, 80));
    std::vector<Eigen::VectorXcd> q;
    std::vector<double> alpha, beta;
    Eigen::VectorXcd v = random_vector(n, opts.seed, static_cast<std::uint64_t>(restart));
    project_out(v, locked);
    v.normalize();
    q.push_back(v);

    Eigen::VectorXd theta;
    Eigen::MatrixXd s;
    std::vector<std::size_t> good;
    for (std::size_t j = 0; j < m_max; ++j) {
      Eigen::VectorXcd w = q[j];
      solver->solve(w);
      project_out(w, locked);
      double a = q[j].dot(w).real();
      alpha.push_back(a);
      project_out(w, q);
      double b = w.norm();
      beta.push_back(b);

      bool last = j + 1 == m_max || b < 1e-14 * std::abs(a);
      if (last || j % 5 == 4) {
        std::size_t m = alpha.size();
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t i = 0; i < m; ++i) {
          t(i, i) = alpha[i];
          if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        theta = es.eigenvalues();
        s = es.eigenvectors();
        good.clear();
        for (std::size_t i = 0; i < m; ++i) {
          double th = theta(i);
          if (th == 0.0) continue;
          double lam = sigma + 1.0 / th;
          if (lam < lo || lam >= hi) continue;
          double err = std::abs(b * s(m - 1, i));
          if (err <= 0.01 * opts.tolerance * std::abs(th) / norm_a) good.push_back(i);
        }
        if (good.size() >= remaining || last) break;
      }
      q.push_back(w / b);
    }

    std::size_t m = alpha.size();
    for (std::size_t i : good) {
      Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n);
      for (std::size_t k = 0; k < m; ++k) y += s(k, i) * q[k];
      project_out(y, locked);
      double nrm = y.norm();
      if (nrm < 0.5) continue;
      y /= nrm;
      ComplexEigenPair p = pair_from_vector(op, y);
      if (p.residual > opts.tolerance || p.energy < lo || p.energy >= hi) continue;
      locked.push_back(y);
      found.push_back(std::move(p));
      if (found.size() == target) break;
    }
  }
  if (found.size() < target)
    fail(ErrorCode::NonConvergence, "Lanczos found " + std::to_string(found.size()) + " of " +
                                        std::to_string(target) + " eigenpairs",
         static_cast<long>(found.size()));
  std::sort(found.begin(), found.end(),
            [](const ComplexEigenPair& a, const ComplexEigenPair& b) { return a.energy < b.energy; });
  return found;
}

std::vector<double> eig_dense_values(const BandedHermitian& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.dense(), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

std::vector<ComplexEigenPair> eig_dense_window(const BandedHermitian& op, double lo, double hi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.dense());
  std::vector<ComplexEigenPair> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double e = es.eigenvalues()(i);
    if (e < lo || e >= hi) continue;
    out.push_back(pair_from_vector(op, es.eigenvectors().col(i)));
  }
  return out;
}

}  // namespace hallsim
