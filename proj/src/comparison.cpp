#include "deltaloop/comparison.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>

#include "deltaloop/errors.hpp"

namespace deltaloop::comparison {

namespace {

constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

// Fourier coefficients c_m of -gamma^2/4 for |m| <= 2N, from the curvature
// interpolant squared on a grid fine enough to avoid aliasing.
std::vector<cd> potential_coefficients(const geometry::LoopCurve& c, int N) {
  const std::size_t M = c.size();
  std::size_t P = std::max<std::size_t>(2 * M, 4 * static_cast<std::size_t>(N) + 2);
  P += P % 2;
  auto g = c.curvature_series().resample(P);
  for (double& v : g) v = -0.25 * v * v;
  return normalized_dft(g);
}

cd coefficient(const std::vector<cd>& c, long m) {
  const auto P = static_cast<long>(c.size());
  return c[static_cast<std::size_t>((m % P + P) % P)];
}

std::vector<double> lowest(const Eigen::MatrixXcd& H, int n_max, Eigen::MatrixXcd* vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense Hermitian eigensolver failed");
  const int n = std::min<int>(n_max, static_cast<int>(H.rows()));
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + n);
  if (vectors) *vectors = es.eigenvectors().leftCols(n);
  return v;
}

}  // namespace

Eigen::MatrixXcd assemble_twisted(const geometry::LoopCurve& c, double B, int N, double kinetic, double shift) {
  if (N < 1) throw PreconditionError("Fourier cutoff must be positive");
  const int dim = 2 * N + 1;
  const double L = c.length();
  const double theta = B * c.area();
  const auto pot = potential_coefficients(c, N);
  Eigen::MatrixXcd H(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) H(i, j) = coefficient(pot, i - j);
  }
  for (int i = 0; i < dim; ++i) {
    const double q = (2 * kPi * (i - N) - theta) / L;
    H(i, i) = cd(H(i, i).real() + kinetic * q * q + shift, 0.0);
  }
  // Exact Hermitian symmetry (the DFT of real data is conjugate-symmetric up to rounding).
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) H(i, j) = std::conj(H(j, i));
  return H;
}

Eigen::MatrixXcd assemble_sB(const geometry::LoopCurve& c, double B, int N) {
  if (N < 8) throw PreconditionError("assemble_sB requires N >= 8");
  return assemble_twisted(c, B, N);
}

Eigen::MatrixXcd assemble_sB_fd(const geometry::LoopCurve& c, double B, int n) {
  if (n < 16) throw PreconditionError("finite-difference grid needs at least 16 nodes");
  const double h = c.length() / n;
  const double theta = B * c.area();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double g = c.curvature_series().value(i * h);
    H(i, i) = 2.0 / (h * h) - 0.25 * g * g;
    if (i + 1 < n) {
      H(i, i + 1) = -1.0 / (h * h);
      H(i + 1, i) = -1.0 / (h * h);
    }
  }
  // phi(L) = e^{-i theta} phi(0): the right neighbour of node n-1 is e^{-i theta} phi_0.
  H(n - 1, 0) = -std::polar(1.0, -theta) / (h * h);
  H(0, n - 1) = std::conj(H(n - 1, 0));
  return H;
}

ComparisonSpectrum twisted_spectrum(const geometry::LoopCurve& c, double B, int N, int n_max, double kinetic,
                                    double shift, bool with_vectors) {
  if (N < 8) throw PreconditionError("Fourier cutoff must be at least 8");
  if (n_max < 1 || n_max > 2 * N + 1) throw PreconditionError("n_max must lie in [1, 2N+1]");
  ComparisonSpectrum s;
  s.B = B;
  s.flux = B * c.area() / (2 * kPi);
  s.N = N;
  s.eigenvalues = lowest(assemble_twisted(c, B, N, kinetic, shift), n_max, with_vectors ? &s.eigenvectors : nullptr);
  const auto fine = lowest(assemble_twisted(c, B, 2 * N, kinetic, shift), n_max, nullptr);
  for (int i = 0; i < n_max; ++i)
    s.doubling_change = std::max(s.doubling_change, std::abs(fine[i] - s.eigenvalues[i]));
  s.converged = s.doubling_change < 1e-8;
  return s;
}

ComparisonSpectrum mu_spectrum(const geometry::LoopCurve& c, double B, int N, int n_max, bool with_vectors) {
  return twisted_spectrum(c, B, N, n_max, 1.0, 0.0, with_vectors);
}

std::vector<double> mu_values(const geometry::LoopCurve& c, double B, int N, int n_max) {
  return lowest(assemble_twisted(c, B, N), n_max, nullptr);
}

namespace {

// Currents I_1..I_n from one three-point flux stencil.
std::vector<Current> currents(const geometry::LoopCurve& c, int n, double B, double dphi, int N) {
  if (!(dphi > 0.0)) throw PreconditionError("flux step must be positive");
  if (n < 1 || n > 2 * N) throw PreconditionError("eigenvalue index out of computed range");
  const double dB = 2 * kPi * dphi / c.area();
  const auto lo = mu_values(c, B - dB, N, n + 1);
  const auto mid = mu_values(c, B, N, n + 1);
  const auto hi = mu_values(c, B + dB, N, n + 1);
  auto spread = [&](std::size_t j) { return std::abs(hi[j] - lo[j]); };
  std::vector<Current> out(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < out.size(); ++k) {
    Current& cur = out[k];
    cur.value = -(hi[k] - lo[k]) / (2 * dphi);
    // Crossing test: a neighbour closer than the variation over the stencil.
    const double reach = 1e-12 + std::max(spread(k), std::max(spread(k + 1), k > 0 ? spread(k - 1) : 0.0));
    for (const auto* v : {&lo, &mid, &hi}) {
      if ((*v)[k + 1] - (*v)[k] <= reach) cur.kink = true;
      if (k > 0 && (*v)[k] - (*v)[k - 1] <= reach) cur.kink = true;
    }
  }
  return out;
}

}  // namespace

Current persistent_current(const geometry::LoopCurve& c, int n, double B, double dphi, int N) {
  return currents(c, n, B, dphi, N).back();
}

namespace {

SweepRow sweep_point(const geometry::LoopCurve& c, double B, int N, int n_max, double dphi) {
  SweepRow r;
  r.B = B;
  r.phi = B * c.area() / (2 * kPi);
  const auto s = mu_spectrum(c, B, N, n_max);
  r.mu = s.eigenvalues;
  r.converged = s.converged;
  for (const auto& cur : currents(c, n_max, B, dphi, N)) {
    r.current.push_back(cur.value);
    r.kink.push_back(cur.kink);
  }
  return r;
}

}  // namespace

namespace serial {
std::vector<SweepRow> sweep(const geometry::LoopCurve& c, const std::vector<double>& B_grid, int N, int n_max,
                            double dphi) {
  std::vector<SweepRow> rows;
  rows.reserve(B_grid.size());
  for (double B : B_grid) rows.push_back(sweep_point(c, B, N, n_max, dphi));
  return rows;
}
}  // namespace serial

namespace omp {
std::vector<SweepRow> sweep(const geometry::LoopCurve& c, const std::vector<double>& B_grid, int N, int n_max,
                            double dphi, int jobs) {
  std::vector<SweepRow> rows(B_grid.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(B_grid.size()); ++i) {
    try {
      rows[static_cast<std::size_t>(i)] = sweep_point(c, B_grid[static_cast<std::size_t>(i)], N, n_max, dphi);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return rows;
}
}  // namespace omp

std::vector<SweepRow> sweep(const geometry::LoopCurve& c, const std::vector<double>& B_grid, int N, int n_max,
                            double dphi, int jobs) {
  if (jobs <= 1) return serial::sweep(c, B_grid, N, n_max, dphi);
  return omp::sweep(c, B_grid, N, n_max, dphi, jobs);
}

}  // namespace deltaloop::comparison
