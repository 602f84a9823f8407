#pragma once

#include <Eigen/Dense>

#include <vector>

#include "deltaloop/geometry.hpp"

namespace deltaloop::comparison {

struct ComparisonSpectrum {
  double B = 0.0;
  double flux = 0.0;  // B |Omega| / 2 pi
  int N = 0;          // modes k = -N..N
  std::vector<double> eigenvalues;
  /// Largest change of a reported eigenvalue when N is doubled.
  double doubling_change = 0.0;
  bool converged = false;
  /// Columns are eigenvectors in the gauge-reduced Fourier basis (filled on request).
  Eigen::MatrixXcd eigenvectors;
};

/// -c d^2/ds^2 - gamma^2/4 + shift on the loop with phi(L) = exp(-i B |Omega|) phi(0),
/// in the basis exp(2 pi i k s / L) after the gauge substitution
/// phi = exp(-i B |Omega| s / L) psi. Row/column i holds mode k = i - N.
Eigen::MatrixXcd assemble_twisted(const geometry::LoopCurve& curve, double B, int N, double kinetic = 1.0,
                                  double shift = 0.0);

/// The comparison operator S_B (kinetic coefficient one, no shift). Requires N >= 8.
Eigen::MatrixXcd assemble_sB(const geometry::LoopCurve& curve, double B, int N);

/// Second-order finite differences on n uniform nodes with the twist carried
/// by the wrap-around entries exp(-+ i B |Omega|).
Eigen::MatrixXcd assemble_sB_fd(const geometry::LoopCurve& curve, double B, int n);

/// Lowest n_max eigenvalues of the twisted operator with the doubling test.
ComparisonSpectrum twisted_spectrum(const geometry::LoopCurve& curve, double B, int N, int n_max, double kinetic,
                                    double shift, bool with_vectors = false);

ComparisonSpectrum mu_spectrum(const geometry::LoopCurve& curve, double B, int N, int n_max,
                               bool with_vectors = false);

/// Sorted eigenvalues only, no doubling test.
std::vector<double> mu_values(const geometry::LoopCurve& curve, double B, int N, int n_max);

struct Current {
  double value = 0.0;
  /// Set when an eigenvalue crossing lies inside the difference stencil.
  bool kink = false;
};

/// I_n = -d mu_n / d phi by central difference in the flux phi = B |Omega| / 2 pi.
Current persistent_current(const geometry::LoopCurve& curve, int n, double B, double dphi = 1e-4, int N = 128);

struct SweepRow {
  double B = 0.0;
  double phi = 0.0;
  std::vector<double> mu;
  std::vector<double> current;
  std::vector<bool> kink;
  bool converged = false;
};

namespace serial {
std::vector<SweepRow> sweep(const geometry::LoopCurve& curve, const std::vector<double>& B_grid, int N, int n_max,
                            double dphi = 1e-4);
}

namespace omp {
std::vector<SweepRow> sweep(const geometry::LoopCurve& curve, const std::vector<double>& B_grid, int N, int n_max,
                            double dphi = 1e-4, int jobs = 0);
}

/// Rows in input order; jobs <= 1 runs serially.
std::vector<SweepRow> sweep(const geometry::LoopCurve& curve, const std::vector<double>& B_grid, int N, int n_max,
                            double dphi = 1e-4, int jobs = 1);

}  // namespace deltaloop::comparison
