#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "deltaloop/spectral.hpp"

namespace deltaloop::geometry {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class Interpolation { Fourier, CubicSpline };

/// Curvature and its first two arc-length derivatives at one point.
struct CurvatureJet {
  double gamma = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Closed counter-clockwise loop sampled uniformly in arc length.
///
/// Curvature follows gamma = x''y' - y''x' (negative for a CCW circle) and the
/// tangent angle is H(s) = H(0) - int_0^s gamma. Immutable; copies share the
/// lazily computed strip half-width.
class LoopCurve {
 public:
  /// Builds from uniform samples s_i = i L / M and checks the loop invariants.
  /// Tangent angles default to base_angle - int gamma; an interpolant with its
  /// own exact tangents may pass them instead.
  LoopCurve(double length, std::vector<double> x, std::vector<double> y, double base_angle,
            std::vector<double> gamma, double closure_residual = 0.0, std::vector<double> tangent_angle = {});

  [[nodiscard]] double length() const { return length_; }
  [[nodiscard]] std::size_t size() const { return x_.size(); }
  [[nodiscard]] double arc(std::size_t i) const { return length_ * static_cast<double>(i) / static_cast<double>(size()); }

  [[nodiscard]] std::span<const double> x() const { return x_; }
  [[nodiscard]] std::span<const double> y() const { return y_; }
  [[nodiscard]] std::span<const double> tangent_angle() const { return H_; }
  [[nodiscard]] std::span<const double> curvature() const { return gamma_; }

  [[nodiscard]] double area() const { return area_; }
  [[nodiscard]] double closure_residual() const { return closure_residual_; }
  /// max |gamma| over the samples.
  [[nodiscard]] double gamma_plus() const { return gamma_plus_; }
  /// int_0^L gamma ds (equals -2 pi for an accepted loop).
  [[nodiscard]] double total_curvature() const { return curvature_series_.mean() * length_; }

  [[nodiscard]] Point position(double s) const;
  [[nodiscard]] Point position(std::size_t i) const { return {x_[i], y_[i]}; }
  [[nodiscard]] double angle(double s) const;
  [[nodiscard]] Point tangent(double s) const;
  [[nodiscard]] Point tangent(std::size_t i) const;
  [[nodiscard]] CurvatureJet jet(double s) const;
  [[nodiscard]] CurvatureJet jet(std::size_t i) const;

  [[nodiscard]] const PeriodicSeries& curvature_series() const { return curvature_series_; }

  /// Half-width a1 of the injective strip, computed once with a_max = 1/gamma_plus.
  [[nodiscard]] double strip_halfwidth() const;

 private:
  struct Cache;

  double length_;
  std::vector<double> x_, y_, H_, gamma_;
  std::vector<double> gamma_d1_, gamma_d2_;
  PeriodicSeries x_series_, y_series_, curvature_series_;
  double base_angle_;
  double area_ = 0.0;
  double closure_residual_ = 0.0;
  double gamma_plus_ = 0.0;
  std::shared_ptr<Cache> cache_;
};

/// Arc-length reparametrization of a closed polygon's smooth periodic interpolant.
/// The points are taken as uniform samples of a periodic parameter.
LoopCurve from_samples(std::span<const Point> points, std::size_t M,
                       Interpolation mode = Interpolation::Fourier);

/// Reconstruction from curvature; throws PreconditionError when the result
/// does not close to 1e-6 L.
LoopCurve from_curvature(const std::function<double(double)>& gamma, double length, std::size_t M,
                         Point base_point = {}, double base_angle = 0.0);
LoopCurve from_curvature(std::span<const double> gamma_samples, double length, std::size_t M,
                         Point base_point = {}, double base_angle = 0.0);

/// Closure residual |Gamma(L) - Gamma(0)| of the curvature reconstruction, without
/// constructing (or validating) a curve.
double closure_residual(const std::function<double(double)>& gamma, double length, std::size_t M);

LoopCurve circle(double R, std::size_t M, Point center = {});
LoopCurve ellipse(double a, double b, std::size_t M);
/// gamma(s) = -1 + amplitude cos(lobes 2 pi s / L) with L = 2 pi; closes by symmetry for lobes >= 2.
LoopCurve wiggly(std::size_t M, double amplitude = 0.3, int lobes = 3);

/// Green-formula area; cross-checked against the phase route (throws on disagreement).
double enclosed_area(const LoopCurve& curve);

/// T_B(s) = -(B/2) int_0^s (G2 G1' - G2' G1).
double phase_T(const LoopCurve& curve, double B, double s);
/// T_B at every sample s_i, plus T_B(L) as the final entry.
std::vector<double> phase_T_samples(const LoopCurve& curve, double B);

Point strip_point(const LoopCurve& curve, double s, double u);
Point strip_point(const LoopCurve& curve, std::size_t i, double u);

/// Largest a <= a_max (to 1e-3 L) with 1 + u gamma > 0 and an injective strip map.
double injectivity_halfwidth(const LoopCurve& curve, double a_max);

double effective_potential(const CurvatureJet& jet, double u);
double effective_potential(const LoopCurve& curve, double s, double u);
double effective_potential(const LoopCurve& curve, std::size_t i, double u);

}  // namespace deltaloop::geometry
