#include <doctest.h>

#include <cmath>

#include "deltaloop/errors.hpp"
#include "deltaloop/transverse.hpp"

using namespace deltaloop;
using namespace deltaloop::transverse;

TEST_SUITE("transverse") {
  TEST_CASE("Dirichlet ground state") {
    const auto wide = zeta_plus(50.0, 2.0);
    CHECK(wide.zeta == doctest::Approx(-1.0).epsilon(1e-10));

    const auto z = zeta_plus(1.0, 10.0);
    CHECK(z.zeta > -25.0);
    CHECK(z.zeta < -25.0 + 200.0 * std::exp(-5.0));
    CHECK(z.within_bounds());
    CHECK(z.zeta == doctest::Approx(-24.9955).epsilon(1e-5));
    CHECK(2 * z.kappa == doctest::Approx(10.0 * std::tanh(z.kappa)).epsilon(1e-12));
    CHECK(z.excess == doctest::Approx(z.zeta + 25.0).epsilon(1e-9));
    CHECK(z.second_eigenvalue >= -1e-8);

    const auto fd = transverse_fd_oracle(1.0, 10.0, 0.0, Kind::Dirichlet, 801);
    CHECK(std::abs(fd.zeta - z.zeta) < 1e-3);

    CHECK_THROWS_AS(zeta_plus(0.2, 10.0), PreconditionError);
  }

  TEST_CASE("Robin ground state") {
    const auto wide = zeta_minus(50.0, 2.0, 0.0);
    CHECK(wide.zeta == doctest::Approx(-1.0).epsilon(1e-10));

    const auto z = zeta_minus(1.0, 10.0, 1.0);
    CHECK(z.zeta < -25.0);
    CHECK(z.zeta > -25.0 - (2205.0 / 16.0) * 100.0 * std::exp(-5.0));
    CHECK(z.within_bounds());
    const double k = z.kappa;
    CHECK(std::tanh(k) * (2 * k * k + 10.0) == doctest::Approx(k * 12.0).epsilon(1e-12));
    CHECK(z.second_eigenvalue >= -1e-8);

    CHECK_THROWS_AS(zeta_minus(0.5, 10.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(zeta_minus(1.0, 10.0, 4.0), PreconditionError);
  }

  TEST_CASE("zero coupling reduces to the Dirichlet and Neumann problems") {
    const double a = 0.8;
    const auto d = transverse_fd_oracle(a, 0.0, 0.0, Kind::Dirichlet, 401);
    const double exact = M_PI * M_PI / (4 * a * a);
    CHECK(d.zeta == doctest::Approx(exact).epsilon(1e-4));
    const auto d2 = transverse_fd_oracle(a, 0.0, 0.0, Kind::Dirichlet, 801);
    CHECK(std::abs(d.zeta - exact) / std::abs(d2.zeta - exact) == doctest::Approx(4.0).epsilon(0.01));
    CHECK(std::abs(transverse_fd_oracle(a, 0.0, 0.0, Kind::Robin, 401).zeta) < 1e-6);
  }

  TEST_CASE("matching roots agree with the finite-difference oracle to second order") {
    for (Kind kind : {Kind::Dirichlet, Kind::Robin}) {
      const double exact = kind == Kind::Dirichlet ? zeta_plus(1.0, 10.0).zeta : zeta_minus(1.0, 10.0, 1.0).zeta;
      const double g = kind == Kind::Robin ? 1.0 : 0.0;
      const double e1 = std::abs(transverse_fd_oracle(1.0, 10.0, g, kind, 401).zeta - exact);
      const double e2 = std::abs(transverse_fd_oracle(1.0, 10.0, g, kind, 801).zeta - exact);
      CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
      CHECK(e1 <= fd_error_band(1.0, 10.0, g, kind, 401) * 1.1);
    }
  }

  TEST_CASE("enclosures, ordering and monotonicity on the parameter grid") {
    for (double beta : {10.0, 20.0, 40.0}) {
      double prev = 1e300;
      for (double a : {0.5, 1.0, 2.0}) {
        if (beta * a <= 8.0 / 3.0) continue;
        const auto p = zeta_plus(a, beta);
        CHECK(p.within_bounds());
        CHECK(p.excess > 0.0);
        CHECK(p.zeta <= prev);
        prev = p.zeta;
        for (double g : {0.5, 1.0}) {
          if (a * beta <= 8.0 || beta <= 8.0 * g / 3.0) continue;
          const auto m = zeta_minus(a, beta, g);
          CHECK(m.within_bounds());
          CHECK(m.excess < 0.0);
          CHECK(m.zeta < p.zeta);
          if (a * g <= 1.0) CHECK(m.second_eigenvalue >= -1e-8);
        }
      }
    }
  }

  TEST_CASE("wide Robin strips bind an odd boundary mode") {
    // With a gamma_plus > 1 the odd state, which never sees the delta, is bound by
    // the Robin ends alone: tanh(k a) = k / gamma_plus.
    const auto m = zeta_minus(2.0, 20.0, 1.0);
    double lo = 1e-6, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (std::tanh(2.0 * mid) > mid ? lo : hi) = mid;
    }
    CHECK(m.second_eigenvalue == doctest::Approx(-lo * lo).epsilon(1e-4));
    CHECK(zeta_minus(0.45, 20.0, 1.0).second_eigenvalue >= -1e-8);
  }
}
