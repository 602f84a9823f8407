#include "deltaloop/solver2d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deltaloop/errors.hpp"

namespace deltaloop::solver2d {

double default_shift(double beta) { return -0.3 * beta * beta - 1.0; }

Spectrum2D lowest_eigenvalues(const lattice::Assembled& A, int k, double sigma, std::uint64_t seed, double cutoff) {
  eigensolver::Options eo;
  eo.seed = seed;
  const auto r = eigensolver::lowest(A.H, k, sigma, eo);
  Spectrum2D s;
  s.h = A.grid.h();
  s.x0 = A.grid.x0();
  s.x1 = A.grid.x1();
  s.y0 = A.grid.y0();
  s.y1 = A.grid.y1();
  s.requested = k;
  s.cutoff = cutoff;
  s.deposited_total = A.deposited_total;
  s.shift = r.shift;
  s.iterations = r.iterations;
  s.seed = r.seed;
  for (int j = 0; j < k; ++j) {
    if (!(r.values[static_cast<std::size_t>(j)] < cutoff)) break;
    s.eigenvalues.push_back(r.values[static_cast<std::size_t>(j)]);
    s.residuals.push_back(r.residuals[static_cast<std::size_t>(j)]);
  }
  return s;
}

Spectrum2D solve(const geometry::LoopCurve& c, double B, double beta, const lattice::Grid2D& g,
                 const SolveOptions& o) {
  if (o.k < 1 || o.k > 10) throw PreconditionError("k must lie in [1, 10]");
  const auto A = lattice::assemble_H(c, B, beta, g, o.assembly);
  auto s = lowest_eigenvalues(A, o.k, o.shift.value_or(default_shift(beta)), o.seed, o.cutoff);
  s.B = B;
  s.beta = beta;
  return s;
}

Extrapolation extrapolate(const std::vector<double>& h, const std::vector<std::vector<double>>& values) {
  const std::size_t n = h.size();
  if (n < 3 || values.size() != n) throw PreconditionError("extrapolation needs at least three spacings");
  const double q = h[0] / h[1];
  for (std::size_t i = 1; i < n; ++i)
    if (!(h[i] < h[i - 1]) || std::abs(h[i - 1] / h[i] - q) > 1e-9 * q)
      throw PreconditionError("spacings must decrease in geometric progression");
  std::size_t k = values[0].size();
  for (const auto& v : values) k = std::min(k, v.size());

  Extrapolation e;
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 2; i < n; ++i) {
      const double d1 = values[i - 2][j] - values[i - 1][j], d2 = values[i - 1][j] - values[i][j];
      if (!(d1 * d2 > 0.0))
        throw ConvergenceError("lambda_" + std::to_string(j + 1) +
                               "(h) is not monotone; the transverse profile is under-resolved, halve h");
    }
    const double l1 = values[n - 3][j], l2 = values[n - 2][j], l3 = values[n - 1][j];
    const double p = std::log((l1 - l2) / (l2 - l3)) / std::log(q);
    const double c = (l2 - l3) / (std::pow(h[n - 2], p) - std::pow(h[n - 1], p));
    const double star = l3 - c * std::pow(h[n - 1], p);
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(values[i][j] - star - c * std::pow(h[i], p)));
    e.lambda_star.push_back(star);
    e.order.push_back(p);
    e.coefficient.push_back(c);
    e.fit_residual.push_back(resid);
    e.order_flag.push_back(!(p >= 0.8 && p <= 2.2));
    e.eps_disc.push_back(std::abs(star - l3));
  }
  return e;
}

Extrapolation refine(const geometry::LoopCurve& c, double B, double beta, const std::vector<double>& hs, int k,
                     const SolveOptions& o, std::optional<std::array<double, 4>> box) {
  if (hs.size() < 3) throw PreconditionError("refine needs at least three spacings");
  if (!box) {
    const auto g = lattice::Grid2D::around(c, beta, hs.front(), o.assembly.margin);
    box = std::array{g.x0(), g.x1(), g.y0(), g.y1()};
  }
  SolveOptions so = o;
  so.k = k;
  std::vector<Spectrum2D> runs;
  std::vector<std::vector<double>> values;
  for (double h : hs) {
    const lattice::Grid2D g((*box)[0], (*box)[1], (*box)[2], (*box)[3], h);
    runs.push_back(solve(c, B, beta, g, so));
    values.push_back(runs.back().eigenvalues);
  }
  auto e = extrapolate(hs, values);
  e.runs = std::move(runs);
  return e;
}

}  // namespace deltaloop::solver2d
