#pragma once

namespace deltaloop::transverse {

enum class Kind { Dirichlet, Robin };

/// Negative eigenvalue of -d^2/du^2 - beta delta(u) on (-a, a) with
/// Dirichlet ends (Kind::Dirichlet, the "+" operator) or Robin ends
/// f'(+-a) = +-gamma_plus f(+-a) (Kind::Robin, the "-" operator).
struct TransverseEigenvalue {
  double a = 0.0;
  double beta = 0.0;
  double gamma_plus = 0.0;
  Kind kind = Kind::Dirichlet;
  double kappa = 0.0;
  double zeta = 0.0;  // -kappa^2
  /// zeta + beta^2/4, evaluated without cancellation.
  double excess = 0.0;
  /// Open enclosure (lower, upper) of the excess from the explicit bounds.
  double excess_lower = 0.0;
  double excess_upper = 0.0;
  /// Lowest eigenvalue above zeta from the finite-difference oracle.
  double second_eigenvalue = 0.0;

  [[nodiscard]] bool within_bounds() const { return excess_lower < excess && excess < excess_upper; }
};

/// Root of 2 kappa = beta tanh(kappa a) in (0, beta/2). Requires beta a > 8/3.
TransverseEigenvalue zeta_plus(double a, double beta);

/// Root of tanh(kappa a)(2 kappa^2 + beta g) = kappa (beta + 2 g) above beta/2.
/// Requires a beta > 8 and beta > 8 g / 3.
TransverseEigenvalue zeta_minus(double a, double beta, double gamma_plus);

struct FdEigenvalues {
  double zeta = 0.0;  // lowest
  double xi2 = 0.0;   // second lowest
};

/// Lumped linear-element discretization on an odd node count (node at u = 0).
FdEigenvalues transverse_fd_oracle(double a, double beta, double gamma_plus, Kind kind, int mesh_points);

/// Error band of the oracle at mesh_points: |fd(n) - fd(2n-1)| * 4/3, which
/// bounds the O(h^2) error at n when the observed order is two.
double fd_error_band(double a, double beta, double gamma_plus, Kind kind, int mesh_points);

}  // namespace deltaloop::transverse
