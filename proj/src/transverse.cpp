#include "deltaloop/transverse.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <string>

#include "deltaloop/errors.hpp"

namespace deltaloop::transverse {

namespace {

constexpr int kOracleMesh = 801;

// 1 - tanh(x) without cancellation.
double one_minus_tanh(double x) { return 2.0 / (1.0 + std::exp(2.0 * x)); }

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  const double flo = f(lo), fhi = f(hi);
  if (!(flo * fhi < 0.0))
    throw ConvergenceError("matching equation has no sign change on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  const bool lo_positive = flo > 0.0;
  while (hi - lo > 1e-14 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ((f(mid) > 0.0) == lo_positive ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TransverseEigenvalue zeta_plus(double a, double beta) {
  if (!(a > 0.0) || !(beta * a > 8.0 / 3.0))
    throw PreconditionError("zeta_plus requires beta a > 8/3 (got beta a = " + std::to_string(beta * a) + ")");
  // 2 kappa = beta tanh(kappa a), rewritten as (beta - 2 kappa) - beta (1 - tanh) = 0.
  auto F = [&](double k) { return (beta - 2.0 * k) - beta * one_minus_tanh(k * a); };
  const double kappa = bisect(F, 1e-6 * beta, 0.5 * beta);
  TransverseEigenvalue r;
  r.a = a;
  r.beta = beta;
  r.kind = Kind::Dirichlet;
  r.kappa = kappa;
  r.zeta = -kappa * kappa;
  const double gap = 0.5 * beta * one_minus_tanh(kappa * a);  // beta/2 - kappa
  r.excess = gap * (0.5 * beta + kappa);
  r.excess_lower = 0.0;
  r.excess_upper = 2.0 * beta * beta * std::exp(-0.5 * beta * a);
  r.second_eigenvalue = transverse_fd_oracle(a, beta, 0.0, Kind::Dirichlet, kOracleMesh).xi2;
  return r;
}

TransverseEigenvalue zeta_minus(double a, double beta, double gamma_plus) {
  if (!(a > 0.0) || !(gamma_plus >= 0.0)) throw PreconditionError("zeta_minus requires a > 0 and gamma_plus >= 0");
  if (!(a * beta > 8.0))
    throw PreconditionError("zeta_minus requires a beta > 8 (got " + std::to_string(a * beta) + ")");
  if (!(beta > 8.0 * gamma_plus / 3.0))
    throw PreconditionError("zeta_minus requires beta > 8 gamma_plus / 3");
  const double g = gamma_plus;
  // tanh(ka)(2k^2 + beta g) = k (beta + 2g)  <=>  (2k - beta)(k - g) = (1 - tanh)(2k^2 + beta g).
  auto G = [&](double k) { return (2.0 * k - beta) * (k - g) - one_minus_tanh(k * a) * (2.0 * k * k + beta * g); };
  const double kappa = bisect(G, 0.5 * beta, 0.5 * beta + g + 1.0 / a);
  TransverseEigenvalue r;
  r.a = a;
  r.beta = beta;
  r.gamma_plus = g;
  r.kind = Kind::Robin;
  r.kappa = kappa;
  r.zeta = -kappa * kappa;
  const double gap = one_minus_tanh(kappa * a) * (2.0 * kappa * kappa + beta * g) / (2.0 * (kappa - g));
  r.excess = -gap * (kappa + 0.5 * beta);
  r.excess_lower = -(2205.0 / 16.0) * beta * beta * std::exp(-0.5 * beta * a);
  r.excess_upper = 0.0;
  r.second_eigenvalue = transverse_fd_oracle(a, beta, g, Kind::Robin, kOracleMesh).xi2;
  return r;
}

FdEigenvalues transverse_fd_oracle(double a, double beta, double gamma_plus, Kind kind, int mesh_points) {
  if (mesh_points < 201 || mesh_points % 2 == 0)
    throw PreconditionError("transverse oracle needs an odd mesh of at least 201 points");
  const int n = mesh_points;
  const double h = 2.0 * a / (n - 1);
  const int center = n / 2;
  // Stiffness K (with the delta and boundary terms) and lumped mass m on nodes 0..n-1.
  Eigen::VectorXd Kd = Eigen::VectorXd::Constant(n, 2.0 / h);
  Eigen::VectorXd mass = Eigen::VectorXd::Constant(n, h);
  Kd[0] = Kd[n - 1] = 1.0 / h;
  mass[0] = mass[n - 1] = 0.5 * h;
  Kd[0] -= gamma_plus;
  Kd[n - 1] -= gamma_plus;
  Kd[center] -= beta;

  const int first = kind == Kind::Dirichlet ? 1 : 0;
  const int size = kind == Kind::Dirichlet ? n - 2 : n;
  Eigen::VectorXd diag(size), sub(size - 1);
  for (int i = 0; i < size; ++i) diag[i] = Kd[first + i] / mass[first + i];
  for (int i = 0; i + 1 < size; ++i) sub[i] = (-1.0 / h) / std::sqrt(mass[first + i] * mass[first + i + 1]);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("tridiagonal eigensolver failed");
  return {es.eigenvalues()[0], es.eigenvalues()[1]};
}

double fd_error_band(double a, double beta, double gamma_plus, Kind kind, int mesh_points) {
  const double coarse = transverse_fd_oracle(a, beta, gamma_plus, kind, mesh_points).zeta;
  const double fine = transverse_fd_oracle(a, beta, gamma_plus, kind, 2 * mesh_points - 1).zeta;
  return std::abs(coarse - fine) * 4.0 / 3.0;
}

}  // namespace deltaloop::transverse
