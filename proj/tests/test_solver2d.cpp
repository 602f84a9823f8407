#include <doctest.h>

#include <cmath>
#include <numbers>

#include "deltaloop/errors.hpp"
#include "deltaloop/oracle.hpp"
#include "deltaloop/solver2d.hpp"

using namespace deltaloop;
using namespace deltaloop::lattice;
using namespace deltaloop::solver2d;
constexpr double kPi = std::numbers::pi;

namespace {

const geometry::LoopCurve& unit_circle() {
  static const auto c = geometry::circle(1.0, 512);
  return c;
}
const geometry::LoopCurve& ell() {
  static const auto c = geometry::ellipse(1.4, 0.8, 512);
  return c;
}

double max_entry(const SparseMatrix& A) {
  double m = 0.0;
  for (int c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

Eigen::VectorXcd seeded_vector(Eigen::Index n) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = {std::sin(0.7 * static_cast<double>(i)), std::cos(1.3 * static_cast<double>(i))};
  return v;
}

}  // namespace

TEST_SUITE("solver2d") {
  TEST_CASE("grid construction and checks") {
    const Grid2D g(-3, 3, -3, 3, 0.04);
    CHECK(g.nx() == 149);
    CHECK(g.x(0) == doctest::Approx(-2.96));
    CHECK_THROWS_AS(Grid2D(-3, 3, -3, 3, 0.07), PreconditionError);
    CHECK_THROWS_AS(Grid2D(0, 1, 0, 1, 0.0), PreconditionError);

    const auto a = Grid2D::around(unit_circle(), 40.0, 0.01);
    CHECK(a.x1() - a.x0() == doctest::Approx(3.0));
    CHECK_NOTHROW(check_grid(unit_circle(), 40.0, a));
    CHECK(required_margin(2.0) == 2.0);
    CHECK(required_margin(40.0) == 0.5);

    CHECK_THROWS_AS(check_grid(unit_circle(), 5.0, Grid2D(-1.4, 1.4, -1.4, 1.4, 0.02)), PreconditionError);
    CHECK_THROWS_AS(check_grid(unit_circle(), 5.0, Grid2D(-0.8, 0.8, -3, 3, 0.02)), PreconditionError);
    CHECK_THROWS_AS(check_grid(unit_circle(), 100.0, Grid2D(-2, 2, -2, 2, 0.02)), PreconditionError);
  }

  TEST_CASE("deposition totals") {
    for (const auto* c : {&unit_circle(), &ell()}) {
      for (double h : {0.04, 0.01}) {
        const auto g = Grid2D::around(*c, 5.0, h);
        double total = 0.0;
        for (double w : deposit(*c, g, 5.0, Deposition::Bilinear)) total += w;
        CHECK(total == doctest::Approx(c->length()).epsilon(1e-8));
      }
      // Without the cusp correction the link weights integrate t_x^2 + t_y^2 = 1.
      double prev = 1e300;
      for (double h : {0.04, 0.02, 0.01}) {
        const auto g = Grid2D::around(*c, 5.0, h);
        double total = 0.0;
        for (double w : deposit(*c, g, 0.0, Deposition::LinkCorrected)) total += w;
        const double err = std::abs(total - c->length()) / c->length();
        CHECK(err < 0.01);
        CHECK(err <= prev);
        prev = err;
      }
    }
  }

  TEST_CASE("assembled operator is exactly Hermitian and matches the stencil") {
    const auto g = Grid2D::around(ell(), 6.0, 0.05);
    const auto w = deposit(ell(), g, 6.0, Deposition::LinkCorrected);
    const auto st = make_stencil(g, 0.9, w, 6.0, 0.2, -0.1);
    const auto Hs = serial::assemble(st);
    const auto Hp = omp::assemble(st);
    const SparseMatrix D = Hs - SparseMatrix(Hs.adjoint());
    CHECK(max_entry(D) == 0.0);
    CHECK(max_entry(Hs - Hp) == 0.0);

    const auto v = seeded_vector(g.size());
    Eigen::VectorXcd a(g.size()), b(g.size());
    serial::apply(st, v.data(), a.data());
    omp::apply(st, v.data(), b.data());
    const Eigen::VectorXcd ref = Hs * v;
    CHECK((a - ref).norm() <= 1e-12 * ref.norm());
    CHECK((a - b).norm() == 0.0);
  }

  TEST_CASE("gauge centre shifts are diagonal unitaries") {
    const double B = 1.3;
    const auto g = Grid2D::around(unit_circle(), 5.0, 0.05);
    AssemblyOptions o1, o2;
    o2.gauge_x = 0.37;
    o2.gauge_y = -0.81;
    const auto A1 = assemble_H(unit_circle(), B, 5.0, g, o1);
    const auto A2 = assemble_H(unit_circle(), B, 5.0, g, o2);
    // A_2 = A_1 + grad chi with chi = (B/2)(yc x - xc y).
    Eigen::VectorXcd d(g.size());
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        d[g.index(i, j)] = std::polar(1.0, 0.5 * B * (-o2.gauge_y * g.x(i) + o2.gauge_x * g.y(j)));
    const SparseMatrix U = SparseMatrix(d.asDiagonal());
    const SparseMatrix diff = A2.H - SparseMatrix(U.adjoint() * A1.H * U);
    CHECK(max_entry(diff) <= 1e-12 * max_entry(A1.H));

    const auto s1 = lowest_eigenvalues(A1, 3, default_shift(5.0));
    const auto s2 = lowest_eigenvalues(A2, 3, default_shift(5.0));
    REQUIRE(s1.eigenvalues.size() == s2.eigenvalues.size());
    for (std::size_t j = 0; j < s1.eigenvalues.size(); ++j)
      CHECK(std::abs(s1.eigenvalues[j] - s2.eigenvalues[j]) <= 1e-12 * std::max(1.0, std::abs(s1.eigenvalues[j])));
  }

  TEST_CASE("field parity and determinism") {
    const auto g = Grid2D::around(ell(), 6.0, 0.05);
    SolveOptions o;
    o.k = 4;
    const auto plus = solve(ell(), 0.8, 6.0, g, o);
    const auto minus = solve(ell(), -0.8, 6.0, g, o);
    const auto again = solve(ell(), 0.8, 6.0, g, o);
    o.seed = 977;
    const auto other = solve(ell(), 0.8, 6.0, g, o);
    REQUIRE(plus.eigenvalues.size() == 4);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(plus.residuals[j] <= 1e-8);
      CHECK(std::abs(plus.eigenvalues[j] - minus.eigenvalues[j]) <= 1e-9);
      CHECK(plus.eigenvalues[j] == again.eigenvalues[j]);
      CHECK(std::abs(plus.eigenvalues[j] - other.eigenvalues[j]) <= 1e-10);
    }
    CHECK(other.seed == 977);
  }

  TEST_CASE("Dirichlet box is second order") {
    std::vector<double> hs{1.0 / 20, 1.0 / 40, 1.0 / 80};
    std::vector<std::vector<double>> vals;
    for (double h : hs) {
      const Grid2D g(0, 1, 0, 1, h);
      const auto st = make_stencil(g, 0.0, std::vector<double>(static_cast<std::size_t>(g.size()), 0.0), 0.0);
      const auto r = eigensolver::lowest(serial::assemble(st), 1, 0.0);
      const double s = std::sin(kPi * h / 2);
      CHECK(r.values[0] == doctest::Approx(8.0 * s * s / (h * h)).epsilon(1e-12));
      vals.push_back(r.values);
    }
    const auto e = extrapolate(hs, vals);
    CHECK(e.order[0] == doctest::Approx(2.0).epsilon(0.02));
    CHECK(e.lambda_star[0] == doctest::Approx(2 * kPi * kPi).epsilon(1e-5));
    CHECK_FALSE(e.order_flag[0]);
  }

  TEST_CASE("extrapolation bookkeeping") {
    const auto e = extrapolate({0.4, 0.2, 0.1}, {{2 + 3 * 0.16}, {2 + 3 * 0.04}, {2 + 3 * 0.01}});
    CHECK(e.lambda_star[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.order[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.eps_disc[0] == doctest::Approx(0.03).epsilon(1e-9));
    const auto f = extrapolate({0.4, 0.2, 0.1, 0.05}, {{1 + 0.4}, {1 + 0.2}, {1 + 0.1}, {1 + 0.05}});
    CHECK(f.order[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.fit_residual[0] < 1e-12);
    CHECK(extrapolate({0.4, 0.2, 0.1}, {{1 + 0.4 * 0.4 * 0.4}, {1 + 0.008}, {1 + 0.001}}).order_flag[0]);
    CHECK_THROWS_AS(extrapolate({0.4, 0.2, 0.1}, {{1.0}, {0.5}, {0.6}}), ConvergenceError);
    CHECK_THROWS_AS(extrapolate({0.4, 0.2, 0.15}, {{1.0}, {0.5}, {0.4}}), PreconditionError);
    CHECK_THROWS_AS(extrapolate({0.4, 0.2}, {{1.0}, {0.5}}), PreconditionError);
  }

  TEST_CASE("shift handling and the bound-state cutoff") {
    const auto g = Grid2D::around(unit_circle(), 5.0, 0.05, 1.5);
    const auto A = assemble_H(unit_circle(), 0.0, 5.0, g);
    const auto ref = lowest_eigenvalues(A, 1, default_shift(5.0));
    const double l1 = ref.eigenvalues[0];
    // Slightly above lambda_1: the first retry lowers the shift below it.
    const auto retried = lowest_eigenvalues(A, 1, l1 + 0.05);
    CHECK(retried.eigenvalues[0] == doctest::Approx(l1).epsilon(1e-11));
    CHECK(retried.shift < l1);
    CHECK_THROWS_AS(lowest_eigenvalues(A, 1, 20.0), ConvergenceError);

    // Only two channels bind at beta = 5 with margin 1.5 (m = 0, +-1 ... +-2 states
    // lie near zero); everything reported is below the cutoff.
    const auto many = lowest_eigenvalues(A, 10, default_shift(5.0));
    CHECK_FALSE(many.eigenvalues.empty());
    for (double v : many.eigenvalues) CHECK(v < 0.0);
    CHECK(many.eigenvalues.size() <= 10);
  }

  TEST_CASE("circle against the Bessel oracle") {
    const double exact = oracle::circle_delta_2d(1.0, 5.0, 0).energy;
    const auto single = solve(unit_circle(), 0.0, 5.0, Grid2D(-3, 3, -3, 3, 0.02));
    CHECK(std::abs(single.eigenvalues[0] - exact) <= 0.02 * std::abs(exact));

    const auto e = refine(unit_circle(), 0.0, 5.0, {0.08, 0.04, 0.02}, 1, {}, std::array{-3.0, 3.0, -3.0, 3.0});
    CHECK(std::abs(e.lambda_star[0] - exact) <= 0.005 * std::abs(exact));
    CHECK(e.runs.size() == 3);
    CHECK(e.eps_disc[0] > 0.0);
  }

  TEST_CASE("extrapolated value is stable across spacing sequences") {
    // Both sequences start at beta h <= 0.24; coarser starts are still dominated
    // by how the curve happens to cut the lattice.
    const std::array box{-2.1, 2.1, -2.1, 2.1};
    const auto a = refine(unit_circle(), 1.0, 10.0, {0.02, 0.01, 0.005}, 1, {}, box);
    const auto b = refine(unit_circle(), 1.0, 10.0, {0.024, 0.012, 0.006}, 1, {}, box);
    CHECK(std::abs(a.lambda_star[0] - b.lambda_star[0]) <= 5e-4 * std::abs(a.lambda_star[0]));
  }
}
