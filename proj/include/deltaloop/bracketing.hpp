#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deltaloop/comparison.hpp"
#include "deltaloop/geometry.hpp"

namespace deltaloop::bracketing {

/// Curve data at one arc-length point, everything the field terms need.
struct StripSample {
  double x = 0.0, y = 0.0;        // Gamma
  double cos_h = 1.0, sin_h = 0.0;  // Gamma' = (cos H, sin H)
  geometry::CurvatureJet jet;
};

std::vector<StripSample> strip_samples(const geometry::LoopCurve& curve, std::size_t n_s);

/// Coefficient of Im(conj(g) d_s g) after the gauge transformation; N_B(a) is its max modulus.
double momentum_coefficient(const StripSample& p, double B, double u);

/// W_B(s, u), every term of the displayed formula.
double w_potential(const StripSample& p, double B, double u);
double w_potential(const geometry::LoopCurve& curve, double B, double s, double u);

struct GridMaxima {
  double N = 0.0;  // max |momentum coefficient|
  double M = 0.0;  // max |W_B + gamma^2/4|
};

// Maxima over samples x {u_k = -a + 2 a k / (n_u - 1)}; n_u odd so u = 0 is included.
namespace serial {
GridMaxima grid_maxima(const std::vector<StripSample>& samples, double B, double a, int n_u);
}
namespace omp {
GridMaxima grid_maxima(const std::vector<StripSample>& samples, double B, double a, int n_u);
}

struct BracketConstants {
  double a = 0.0;
  double B = 0.0;
  double gamma_plus = 0.0;
  double N = 0.0;
  double M = 0.0;
  /// (N + M) / a at this a.
  double K_fit = 0.0;
  /// s-samples of the accepted grid and the relative change from the previous one.
  int grid_density = 0;
  double refinement_change = 0.0;
};

/// N_B(a) and M_B(a) by grid maximization with s-density doubling until the
/// change is below 1% (at most two refinements). Requires a < 1/(2 gamma_plus).
BracketConstants bracket_constants(const geometry::LoopCurve& curve, double B, double a, int grid_density = 256);

struct LinearFit {
  double K = 0.0;
  /// ||v - K a||_2 / ||v||_2.
  double relative_residual = 0.0;
};

/// Least-squares slope of v against a through the origin.
LinearFit fit_linear_constant(const std::vector<double>& a, const std::vector<double>& v);

struct USpectrum {
  int sign = 1;
  double kinetic = 1.0;  // (1 -+ a gamma_plus)^-2 +- N/2
  double shift = 0.0;    // +-(N/2 + M)
  BracketConstants constants;
  comparison::ComparisonSpectrum spectrum;
};

/// Eigenvalues of U+ (sign = +1) or U- (sign = -1) in the twisted Fourier basis.
/// Throws PreconditionError when U- is not elliptic.
USpectrum u_operator_spectrum(const geometry::LoopCurve& curve, double B, double a, int sign, int N, int n_max);
USpectrum u_operator_spectrum(const geometry::LoopCurve& curve, const BracketConstants& k, int sign, int N,
                              int n_max);

struct BracketOptions {
  /// a(beta) = a_coeff ln(beta) / beta.
  double a_coeff = 6.0;
  /// Fixed half-width, bypassing a(beta), for sensitivity studies.
  std::optional<double> a_override;
  int N = 64;
  int grid_density = 256;
  /// Refuse (PreconditionError) when a precondition fails; otherwise return
  /// what can be computed with preconds_ok = false.
  bool strict = true;
};

double a_of_beta(double beta, const BracketOptions& options = {});

/// Names of the violated preconditions at (a, beta), empty when admissible.
/// Ellipticity of U- is checked only when the geometric conditions hold.
std::vector<std::string> violated_preconditions(const geometry::LoopCurve& curve, double B, double beta,
                                                const BracketOptions& options = {});

/// Smallest beta (to 1%) at or above beta_from with no violated precondition.
double minimal_admissible_beta(const geometry::LoopCurve& curve, double B, double beta_from,
                               const BracketOptions& options = {});

struct BracketInterval {
  int j = 0;
  double B = 0.0;
  double beta = 0.0;
  double a_used = 0.0;
  double tau_minus = 0.0;
  double tau_plus = 0.0;
  double mu_minus = 0.0;
  double mu_plus = 0.0;
  double zeta_minus = 0.0;
  double zeta_plus = 0.0;
  double N_B = 0.0;
  double M_B = 0.0;
  bool preconds_ok = false;
};

/// tau-_j <= lambda_j <= tau+_j for j = 1..n.
std::vector<BracketInterval> bracket(const geometry::LoopCurve& curve, double B, double beta, int n,
                                     const BracketOptions& options = {});

struct CountGuarantee {
  int n = 0;
  /// Fourier cutoff used and the largest change of mu+_j (j <= n + 1) on doubling it.
  int N = 0;
  double mu_plus_error = 0.0;
  /// Set when some tau+_j lies within mu_plus_error of zero.
  bool marginal = false;
};

/// Number of j with tau+_j < 0, a lower bound on the count of negative 2D eigenvalues.
CountGuarantee count_guarantee(const geometry::LoopCurve& curve, double B, double beta,
                               const BracketOptions& options = {});

}  // namespace deltaloop::bracketing
