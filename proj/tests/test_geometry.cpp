#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "deltaloop/errors.hpp"
#include "deltaloop/geometry.hpp"

using namespace deltaloop;
using namespace deltaloop::geometry;
constexpr double kPi = std::numbers::pi;

namespace {

std::vector<Point> ellipse_points(double a, double b, std::size_t n) {
  std::vector<Point> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2 * kPi * static_cast<double>(i) / static_cast<double>(n);
    p[i] = {a * std::cos(t), b * std::sin(t)};
  }
  return p;
}

// Exact curvature (gamma = -textbook curvature) of the ellipse (2,1) at a point on it.
double ellipse_gamma(double x, double y) {
  const double t = std::atan2(y, x / 2);
  return -2.0 / std::pow(4 * std::sin(t) * std::sin(t) + std::cos(t) * std::cos(t), 1.5);
}

double max_gamma_error(const LoopCurve& c) {
  double err = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    err = std::max(err, std::abs(ellipse_gamma(c.x()[i], c.y()[i]) - c.curvature()[i]));
  return err;
}

void check_invariants(const LoopCurve& c) {
  CHECK(c.total_curvature() == doctest::Approx(-2 * kPi).epsilon(1e-6 / (2 * kPi)));
  CHECK(c.closure_residual() <= 1e-8 * c.length());
  CHECK(c.area() > 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto t = c.tangent(i);
    CHECK(std::hypot(t.x, t.y) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(effective_potential(c, i, 0.0) + 0.25 * c.curvature()[i] * c.curvature()[i] == 0.0);
    const auto p = strip_point(c, i, 0.0);
    CHECK(p.x == c.x()[i]);
    CHECK(p.y == c.y()[i]);
  }
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("unit circle from 256 samples") {
    std::vector<Point> pts(256);
    for (std::size_t i = 0; i < 256; ++i) {
      const double t = 2 * kPi * static_cast<double>(i) / 256.0;
      pts[i] = {std::cos(t), std::sin(t)};
    }
    const auto c = from_samples(pts, 256);
    CHECK(c.length() == doctest::Approx(2 * kPi).epsilon(1e-6));
    for (double g : c.curvature()) CHECK(g == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(enclosed_area(c) == doctest::Approx(kPi).epsilon(1e-8));
    check_invariants(c);
  }

  TEST_CASE("ellipse area and curvature self-convergence") {
    const auto c = from_samples(ellipse_points(2, 1, 512), 512);
    CHECK(c.area() == doctest::Approx(2 * kPi).epsilon(1e-6));
    check_invariants(c);

    // Spline path: second-order curvature error, at least 4x smaller on doubling.
    const auto s256 = from_samples(ellipse_points(2, 1, 256), 256, Interpolation::CubicSpline);
    const auto s512 = from_samples(ellipse_points(2, 1, 512), 512, Interpolation::CubicSpline);
    CHECK(max_gamma_error(s256) >= 4.0 * max_gamma_error(s512));
    // Fourier path is spectral: already at rounding level on the coarse grid.
    const auto f256 = from_samples(ellipse_points(2, 1, 256), 256);
    CHECK(max_gamma_error(f256) < 1e-9);
    check_invariants(s512);
  }

  TEST_CASE("input validation rejects bad polygons") {
    std::vector<Point> few(10, Point{0, 0});
    CHECK_THROWS_AS(from_samples(few, 64), PreconditionError);

    auto cw = ellipse_points(2, 1, 64);
    std::reverse(cw.begin(), cw.end());
    CHECK_THROWS_AS(from_samples(cw, 64), PreconditionError);

    // Figure-eight (lemniscate of Gerono) crosses itself at the origin.
    std::vector<Point> eight(64);
    for (std::size_t i = 0; i < 64; ++i) {
      const double t = 2 * kPi * (static_cast<double>(i) + 0.5) / 64.0;
      eight[i] = {std::sin(t), std::sin(t) * std::cos(t)};
    }
    CHECK_THROWS_AS(from_samples(eight, 64), PreconditionError);
  }

  TEST_CASE("reconstruction from curvature") {
    const auto c = from_curvature([](double) { return -1.0; }, 2 * kPi, 256);
    CHECK(c.closure_residual() <= 1e-10);
    CHECK(c.area() == doctest::Approx(kPi).epsilon(1e-8));
    check_invariants(c);

    CHECK_THROWS_AS(from_curvature([](double) { return -1.0; }, 3 * kPi, 256), PreconditionError);
    CHECK(closure_residual([](double) { return -1.0; }, 3 * kPi, 256) == doctest::Approx(2.0).epsilon(1e-8));

    const auto w = wiggly(512);
    check_invariants(w);
    const auto w2 = wiggly(1024);
    CHECK(w.area() == doctest::Approx(w2.area()).epsilon(1e-6));
  }

  TEST_CASE("tangent matches finite differences of positions to second order") {
    const auto w = wiggly(512);
    double err_coarse = 0.0;
    const auto w_fine = wiggly(1024);
    double err_fine = 0.0;
    auto fd_error = [](const LoopCurve& c) {
      double e = 0.0;
      const std::size_t M = c.size();
      const double ds = c.length() / static_cast<double>(M);
      for (std::size_t i = 0; i < M; ++i) {
        const std::size_t ip = (i + 1) % M, im = (i + M - 1) % M;
        const double tx = (c.x()[ip] - c.x()[im]) / (2 * ds), ty = (c.y()[ip] - c.y()[im]) / (2 * ds);
        const auto t = c.tangent(i);
        e = std::max(e, std::hypot(tx - t.x, ty - t.y));
      }
      return e;
    };
    err_coarse = fd_error(w);
    err_fine = fd_error(w_fine);
    CHECK(err_coarse < 1e-3);
    CHECK(err_coarse / err_fine == doctest::Approx(4.0).epsilon(0.05));
  }

  TEST_CASE("phase T_B") {
    const auto c = circle(1.0, 256);
    CHECK(phase_T(c, 2.0, c.length()) == doctest::Approx(2 * kPi).epsilon(1e-8));
    CHECK(phase_T(c, 0.0, 1.3) == 0.0);
    const auto e = ellipse(2, 1, 512);
    CHECK(phase_T(e, 1.0, e.length()) == doctest::Approx(2 * kPi).epsilon(1e-6));
    CHECK_THROWS_AS(phase_T(c, 1.0, 7.0), PreconditionError);
    // T_B is the B-multiple of the swept area; half the circle sweeps half the area.
    CHECK(phase_T(c, 1.0, kPi) == doctest::Approx(kPi / 2).epsilon(1e-10));
  }

  TEST_CASE("strip map") {
    const auto c = circle(1.0, 256);
    for (double s : {0.0, 0.4, 2.5}) {
      const auto p0 = strip_point(c, s, 0.0);
      const auto g = c.position(s);
      CHECK(p0.x == g.x);
      CHECK(p0.y == g.y);
      const auto p = strip_point(c, s, 0.5);
      CHECK(std::hypot(p.x - g.x, p.y - g.y) == doctest::Approx(0.5).epsilon(1e-12));
      // normal (-G2', G1') points to the centre for the CCW circle
      CHECK(std::hypot(p.x, p.y) == doctest::Approx(0.5).epsilon(1e-10));
    }
    CHECK_THROWS_AS(strip_point(c, 0.0, 1.2), PreconditionError);
  }

  TEST_CASE("strip map separates distinct grid points on the wiggly loop") {
    const auto w = wiggly(256);
    const double a1 = w.strip_halfwidth();
    std::vector<Point> img;
    const int nu = 5;
    for (std::size_t i = 0; i < w.size(); i += 2)
      for (int k = -nu; k <= nu; ++k) img.push_back(strip_point(w, i, 0.999 * a1 * k / nu));
    // Neighbouring images shrink by the Jacobian 1 + u gamma; anything closer
    // than half the compressed spacing would signal a fold.
    const double jmin = 1.0 - 0.999 * a1 * w.gamma_plus();
    const double spacing = jmin * std::min(2 * w.length() / static_cast<double>(w.size()), 0.999 * a1 / nu);
    double dmin = 1e300;
    for (std::size_t p = 0; p < img.size(); ++p)
      for (std::size_t q = p + 1; q < img.size(); ++q)
        dmin = std::min(dmin, std::hypot(img[p].x - img[q].x, img[p].y - img[q].y));
    CHECK(dmin > 0.5 * spacing);
  }

  TEST_CASE("injectivity half-width") {
    const auto c = circle(1.0, 256);
    CHECK(injectivity_halfwidth(c, 2.0) >= 0.99);
    CHECK(injectivity_halfwidth(c, 2.0) < 1.0);
    const auto e = ellipse(2, 1, 512);
    CHECK(injectivity_halfwidth(e, 2.0) <= 0.5);
    const auto w1 = wiggly(256), w2 = wiggly(512);
    const double res = 1e-3 * w1.length();
    CHECK(std::abs(injectivity_halfwidth(w1, 2.0) - injectivity_halfwidth(w2, 2.0)) <= res);
    CHECK(injectivity_halfwidth(c, 0.3) == 0.3);
    CHECK_THROWS_AS(injectivity_halfwidth(c, 0.0), PreconditionError);
  }

  TEST_CASE("effective potential") {
    const auto c = circle(1.0, 256);
    CHECK(effective_potential(c, 1.0, 0.2) == doctest::Approx(-0.390625).epsilon(1e-12));
    CHECK_THROWS_AS(effective_potential(c, 0.0, 1.5), PreconditionError);

    // Independent finite-difference derivatives of an analytic curvature.
    const auto w = wiggly(512);
    auto g = [](double s) { return -1.0 + 0.3 * std::cos(3 * s); };
    const double h = 1e-3;
    double err = 0.0;
    for (double s = 0.05; s < 2 * kPi; s += 0.37) {
      for (double u : {-0.5, -0.2, 0.1, 0.4}) {
        CurvatureJet j{g(s), (g(s + h) - g(s - h)) / (2 * h), (g(s + h) - 2 * g(s) + g(s - h)) / (h * h)};
        err = std::max(err, std::abs(effective_potential(w, s, u) - effective_potential(j, u)));
      }
    }
    CHECK(err < 1e-4);
  }
}
