#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "deltaloop/eigensolver.hpp"
#include "deltaloop/geometry.hpp"
#include "deltaloop/lattice.hpp"

namespace deltaloop::solver2d {

struct Spectrum2D {
  double B = 0.0;
  double beta = 0.0;
  double h = 0.0;
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  int requested = 0;
  /// Eigenvalues below the cutoff, ascending.
  std::vector<double> eigenvalues;
  std::vector<double> residuals;
  double cutoff = 0.0;
  double deposited_total = 0.0;
  double shift = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
};

/// Default shift -0.3 beta^2 - 1, below the lowest expected eigenvalue.
double default_shift(double beta);

/// k lowest eigenvalues of an assembled lattice operator; only those below the
/// cutoff are reported as bound states.
Spectrum2D lowest_eigenvalues(const lattice::Assembled& H, int k, double sigma, std::uint64_t seed = 1,
                              double cutoff = 0.0);

struct SolveOptions {
  int k = 1;
  std::optional<double> shift;
  std::uint64_t seed = 1;
  double cutoff = 0.0;
  lattice::AssemblyOptions assembly;
};

Spectrum2D solve(const geometry::LoopCurve& curve, double B, double beta, const lattice::Grid2D& grid,
                 const SolveOptions& options = {});

struct Extrapolation {
  /// Per eigenvalue index: lambda* of lambda(h) = lambda* + c h^p from the three finest spacings.
  std::vector<double> lambda_star;
  std::vector<double> order;
  std::vector<double> coefficient;
  /// max |lambda(h_i) - fit(h_i)| over all spacings (zero with exactly three).
  std::vector<double> fit_residual;
  /// Set when the observed order falls outside [0.8, 2.2].
  std::vector<bool> order_flag;
  /// |lambda* - lambda(h_min)|.
  std::vector<double> eps_disc;
  std::vector<Spectrum2D> runs;
};

/// Fit from a table of eigenvalues per spacing (spacings decreasing geometrically).
/// Throws ConvergenceError when lambda(h) is not monotone.
Extrapolation extrapolate(const std::vector<double>& h, const std::vector<std::vector<double>>& values);

/// Solves on each spacing over one common box and extrapolates. Without a box,
/// the box is fitted around the curve for the coarsest spacing.
Extrapolation refine(const geometry::LoopCurve& curve, double B, double beta, const std::vector<double>& h_sequence,
                     int k, const SolveOptions& options = {},
                     std::optional<std::array<double, 4>> box = std::nullopt);

}  // namespace deltaloop::solver2d
