#pragma once

namespace deltaloop::oracle {

struct BesselPair {
  int m = 0;
  double x = 0.0;
  double I = 0.0;   // I_m(x)
  double K = 0.0;   // K_m(x)
  double I1 = 0.0;  // I_{m+1}(x)
  double K1 = 0.0;  // K_{m+1}(x)

  /// |x (I_m K_{m+1} + I_{m+1} K_m) - 1|, the relative Wronskian defect.
  [[nodiscard]] double wronskian_defect() const;
};

/// Modified Bessel functions for 0 <= m <= 10 and 0 < x <= 100.
/// K_0, K_1 from series (x <= 2), Steed's continued fraction (x < 25) or the
/// Hankel expansion; K_m by forward recurrence; I_m from the downward ratio
/// recurrence normalized by the Wronskian.
BesselPair bessel_ik(int m, double x);

/// Plain power series for I_m(x); independent check for moderate x.
double bessel_i_series(int m, double x);

/// Energy (2 pi / L)^2 (n + phi)^2 of the ideal ring.
double ideal_ring(double L, int n, double phi);

/// j-th smallest of ((2 pi k - B pi R^2) / (2 pi R))^2 - 1/(4 R^2), k in Z.
double mu_circle(double R, double B, int j);

struct CircleLevel {
  int m = 0;
  double kappa = 0.0;
  double energy = 0.0;  // -kappa^2
};

/// Bound state of the delta-ring of radius R at B = 0 in angular channel m:
/// root of beta R I_m(kappa R) K_m(kappa R) = 1. Throws PreconditionError
/// when channel m has no bound state.
CircleLevel circle_delta_2d(double R, double beta, int m);

}  // namespace deltaloop::oracle
