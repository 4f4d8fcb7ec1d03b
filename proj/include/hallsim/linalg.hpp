#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace hallsim {

using cplx = std::complex<double>;

struct TridiagonalOperator {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }
  void apply(const double* x, double* y) const;
  // Max row sum, used to scale tolerances.
  double norm_inf() const;
  bool operator==(const TridiagonalOperator&) const = default;
};

template <class T>
struct BasicEigenPair {
  double energy = 0.0;
  std::vector<T> vector;
  double residual = 0.0;
  double norm = 1.0;
};

using EigenPair = BasicEigenPair<double>;
using ComplexEigenPair = BasicEigenPair<cplx>;

struct SolverOptions {
  double tolerance = 1e-9;
  int max_iterations = 60;
  // Extra inverse-iteration sweeps after convergence; sharpens far tails.
  int polish = 0;
  std::uint64_t seed = 0x5eedULL;
};

// Number of eigenvalues strictly below x.
std::size_t sturm_count(const TridiagonalOperator& op, double x);

// Eigenvalues with indices first..first+count-1 (ascending) by bisection.
std::vector<double> tridiagonal_eigenvalues(const TridiagonalOperator& op, std::size_t first,
                                            std::size_t count);

std::vector<EigenPair> eig_tridiagonal_range(const TridiagonalOperator& op, std::size_t first,
                                             std::size_t count, const SolverOptions& opts = {});
std::vector<EigenPair> eig_tridiagonal_lowest(const TridiagonalOperator& op, std::size_t count,
                                              const SolverOptions& opts = {});
std::vector<EigenPair> eig_tridiagonal_window(const TridiagonalOperator& op, double lo, double hi,
                                              const SolverOptions& opts = {});

double residual_norm(const TridiagonalOperator& op, double energy, const std::vector<double>& v);

// Hermitian band matrix with lower bandwidth kd; only the lower triangle is stored.
class BandedHermitian {
 public:
  BandedHermitian() = default;
  BandedHermitian(std::size_t n, std::size_t kd);

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return kd_; }

  // Entry (i, j) with i >= j and i - j <= kd.
  cplx& lower(std::size_t i, std::size_t j) { return band_[j * (kd_ + 1) + (i - j)]; }
  cplx lower(std::size_t i, std::size_t j) const { return band_[j * (kd_ + 1) + (i - j)]; }
  cplx at(std::size_t i, std::size_t j) const;

  void apply(const cplx* x, cplx* y) const;
  std::vector<cplx> apply(const std::vector<cplx>& x) const;
  Eigen::MatrixXcd dense() const;
  double norm_inf() const;

 private:
  std::size_t n_ = 0;
  std::size_t kd_ = 0;
  std::vector<cplx> band_;
};

using SparseSymmetricOperator = BandedHermitian;

// Number of eigenvalues strictly below sigma, from an LDL^H factorization of A - sigma.
std::size_t inertia_below(const BandedHermitian& op, double sigma);

struct SparseOptions {
  double tolerance = 1e-7;
  int max_restarts = 30;
  std::uint64_t seed = 0x1a2c05ULL;
};

std::vector<ComplexEigenPair> eig_sparse_window(const BandedHermitian& op, double lo, double hi,
                                                std::size_t max_pairs,
                                                const SparseOptions& opts = {});

std::vector<ComplexEigenPair> eig_dense_window(const BandedHermitian& op, double lo, double hi);
std::vector<double> eig_dense_values(const BandedHermitian& op);

double residual_norm(const BandedHermitian& op, double energy, const std::vector<cplx>& v);

}  // namespace hallsim
