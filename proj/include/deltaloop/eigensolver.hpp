#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstdint>
#include <vector>

namespace deltaloop::eigensolver {

struct Options {
  /// Absolute residual target ||H v - lambda v|| for unit v.
  double tolerance = 1e-8;
  int max_iterations = 300;
  std::uint64_t seed = 1;
};

struct Result {
  std::vector<double> values;
  std::vector<double> residuals;
  Eigen::MatrixXcd vectors;
  /// Final shift; a successful Cholesky factorization of H - shift certifies shift < lambda_min.
  double shift = 0.0;
  int iterations = 0;
  int factorizations = 0;
  std::uint64_t seed = 0;
};

/// k lowest eigenpairs of a sparse Hermitian matrix by block subspace iteration
/// on (H - sigma)^-1 with Rayleigh-Ritz, starting below the spectrum at sigma.
/// The shift moves up towards the lowest Ritz value as it settles, each move
/// certified by a successful factorization. A failed initial factorization is
/// retried at most three times with lower shifts.
Result lowest(const Eigen::SparseMatrix<std::complex<double>>& H, int k, double sigma, const Options& options = {});

}  // namespace deltaloop::eigensolver
