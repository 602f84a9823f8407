#include "deltaloop/geometry.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "deltaloop/errors.hpp"

namespace deltaloop::geometry {

namespace {

constexpr double kPi = std::numbers::pi;
using Gauss = boost::math::quadrature::gauss<double, 8>;

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Point p, Point q, Point r) {
  return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) && std::min(p.y, r.y) <= q.y &&
         q.y <= std::max(p.y, r.y);
}

// Closed-segment intersection (touching counts).
bool segments_meet(Point p1, Point p2, Point q1, Point q2) {
  const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(q1, p1, q2)) return true;
  if (d2 == 0 && on_segment(q1, p2, q2)) return true;
  if (d3 == 0 && on_segment(p1, q1, p2)) return true;
  if (d4 == 0 && on_segment(p1, q2, p2)) return true;
  return false;
}

void validate_polygon(std::span<const Point> pts) {
  const std::size_t n = pts.size();
  if (n < 16) throw PreconditionError("need at least 16 points, got " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = pts[i], b = pts[(i + 1) % n];
    if (a.x == b.x && a.y == b.y) throw PreconditionError("repeated consecutive point at index " + std::to_string(i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_meet(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
        throw PreconditionError("polygon is self-intersecting (edges " + std::to_string(i) + " and " +
                                std::to_string(j) + ")");
    }
  }
  double twice_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = pts[i], b = pts[(i + 1) % n];
    twice_area += a.x * b.y - b.x * a.y;
  }
  if (twice_area <= 0.0) throw PreconditionError("polygon is clockwise; supply a counter-clockwise loop");
}

// Value and first two derivatives of a planar parametric curve at t in [0,1).
struct Eval {
  Point z, d1, d2;
};

class ParametricCurve {
 public:
  virtual ~ParametricCurve() = default;
  [[nodiscard]] virtual Eval eval(double t) const = 0;
  [[nodiscard]] double speed(double t) const {
    const Eval e = eval(t);
    return std::hypot(e.d1.x, e.d1.y);
  }
};

class FourierCurve final : public ParametricCurve {
 public:
  FourierCurve(std::span<const double> x, std::span<const double> y) : xs_(x, 1.0), ys_(y, 1.0) {}
  [[nodiscard]] Eval eval(double t) const override {
    return {{xs_.value(t), ys_.value(t)},
            {xs_.derivative(t, 1), ys_.derivative(t, 1)},
            {xs_.derivative(t, 2), ys_.derivative(t, 2)}};
  }

 private:
  PeriodicSeries xs_, ys_;
};

// Periodic cubic spline on uniform knots t_i = i/n; second-derivative moments
// come from the circulant system m_{i-1} + 4 m_i + m_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1}) / dt^2.
class SplineCurve final : public ParametricCurve {
 public:
  SplineCurve(std::span<const double> x, std::span<const double> y)
      : n_(x.size()), x_(x.begin(), x.end()), y_(y.begin(), y.end()), mx_(moments(x)), my_(moments(y)) {}

  [[nodiscard]] Eval eval(double t) const override {
    const double dt = 1.0 / static_cast<double>(n_);
    double tt = t - std::floor(t);
    auto i = static_cast<std::size_t>(tt / dt);
    if (i >= n_) i = n_ - 1;
    const std::size_t j = (i + 1) % n_;
    const double a = (static_cast<double>(i + 1) * dt - tt);  // distance to right knot
    const double b = tt - static_cast<double>(i) * dt;        // distance to left knot
    auto piece = [&](const std::vector<double>& v, const std::vector<double>& m, double& f, double& f1, double& f2) {
      f = m[i] * a * a * a / (6 * dt) + m[j] * b * b * b / (6 * dt) + (v[i] - m[i] * dt * dt / 6) * a / dt +
          (v[j] - m[j] * dt * dt / 6) * b / dt;
      f1 = -m[i] * a * a / (2 * dt) + m[j] * b * b / (2 * dt) - (v[i] - m[i] * dt * dt / 6) / dt +
           (v[j] - m[j] * dt * dt / 6) / dt;
      f2 = m[i] * a / dt + m[j] * b / dt;
    };
    Eval e;
    piece(x_, mx_, e.z.x, e.d1.x, e.d2.x);
    piece(y_, my_, e.z.y, e.d1.y, e.d2.y);
    return e;
  }

 private:
  static std::vector<double> moments(std::span<const double> v) {
    const std::size_t n = v.size();
    const double dt = 1.0 / static_cast<double>(n);
    const auto c = normalized_dft(v);
    std::vector<std::complex<double>> spec(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double cs = std::cos(2 * kPi * static_cast<double>(k) / static_cast<double>(n));
      spec[k] = c[k] * (6.0 * (2 * cs - 2) / (dt * dt * (4 + 2 * cs)));
    }
    return inverse_dft_real(spec);
  }

  std::size_t n_;
  std::vector<double> x_, y_, mx_, my_;
};

struct ArcLengthSamples {
  double length = 0.0;
  std::vector<double> x, y, gamma, H;
  double base_angle = 0.0;
};

// Reparametrizes by arc length: cumulative Gauss-Legendre per knot interval,
// then Newton inversion of S(t) = s_j.
ArcLengthSamples reparametrize(const ParametricCurve& c, std::size_t n_knots, std::size_t M) {
  const double dt = 1.0 / static_cast<double>(n_knots);
  std::vector<double> S(n_knots + 1, 0.0);
  auto speed = [&](double t) { return c.speed(t); };
  for (std::size_t i = 0; i < n_knots; ++i) {
    const double t0 = static_cast<double>(i) * dt;
    S[i + 1] = S[i] + Gauss::integrate(speed, t0, t0 + dt);
  }
  ArcLengthSamples out;
  out.length = S[n_knots];
  out.x.resize(M);
  out.y.resize(M);
  out.gamma.resize(M);
  out.H.resize(M);
  for (std::size_t j = 0; j < M; ++j) {
    const double s = out.length * static_cast<double>(j) / static_cast<double>(M);
    auto it = std::upper_bound(S.begin(), S.end(), s);
    std::size_t i = static_cast<std::size_t>(std::distance(S.begin(), it)) - 1;
    if (i >= n_knots) i = n_knots - 1;
    const double t0 = static_cast<double>(i) * dt;
    double t = t0 + dt * (s - S[i]) / std::max(S[i + 1] - S[i], 1e-300);
    for (int iter = 0; iter < 50; ++iter) {
      const double f = S[i] + (t >= t0 ? Gauss::integrate(speed, t0, t) : -Gauss::integrate(speed, t, t0)) - s;
      const double step = f / speed(t);
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const Eval e = c.eval(t);
    const double sp = std::hypot(e.d1.x, e.d1.y);
    out.x[j] = e.z.x;
    out.y[j] = e.z.y;
    out.gamma[j] = (e.d2.x * e.d1.y - e.d2.y * e.d1.x) / (sp * sp * sp);
    const double h = std::atan2(e.d1.y, e.d1.x);
    if (j == 0) {
      out.base_angle = h;
      out.H[j] = h;
    } else {
      out.H[j] = h + 2 * kPi * std::round((out.H[j - 1] - h) / (2 * kPi));
    }
  }
  return out;
}

struct Reconstruction {
  std::vector<double> x, y, gamma;
  double residual = 0.0;
};

// H(s) = base_angle - int_0^s gamma; positions by Gauss-Legendre on each of M cells.
Reconstruction reconstruct(const std::function<double(double)>& gamma, double L, std::size_t M, Point base,
                           double base_angle) {
  const double ds = L / static_cast<double>(M);
  Reconstruction r;
  r.x.resize(M);
  r.y.resize(M);
  r.gamma.resize(M);
  double H = base_angle;
  Point p = base;
  for (std::size_t i = 0; i < M; ++i) {
    const double s0 = static_cast<double>(i) * ds;
    r.x[i] = p.x;
    r.y[i] = p.y;
    r.gamma[i] = gamma(s0);
    auto angle_at = [&](double s) { return s > s0 ? H - Gauss::integrate(gamma, s0, s) : H; };
    p.x += Gauss::integrate([&](double s) { return std::cos(angle_at(s)); }, s0, s0 + ds);
    p.y += Gauss::integrate([&](double s) { return std::sin(angle_at(s)); }, s0, s0 + ds);
    H -= Gauss::integrate(gamma, s0, s0 + ds);
  }
  r.residual = std::hypot(p.x - base.x, p.y - base.y);
  return r;
}

}  // namespace

struct LoopCurve::Cache {
  std::once_flag once;
  double a1 = 0.0;
};

LoopCurve::LoopCurve(double length, std::vector<double> x, std::vector<double> y, double base_angle,
                     std::vector<double> gamma, double closure_residual, std::vector<double> tangent_angle)
    : length_(length),
      x_(std::move(x)),
      y_(std::move(y)),
      gamma_(std::move(gamma)),
      base_angle_(base_angle),
      closure_residual_(closure_residual),
      cache_(std::make_shared<Cache>()) {
  const std::size_t M = x_.size();
  if (!(length_ > 0.0)) throw PreconditionError("curve length must be positive");
  if (M < 16 || y_.size() != M || gamma_.size() != M)
    throw PreconditionError("curve needs at least 16 consistent samples");
  x_series_ = PeriodicSeries(x_, length_);
  y_series_ = PeriodicSeries(y_, length_);
  curvature_series_ = PeriodicSeries(gamma_, length_);
  gamma_d1_ = curvature_series_.derivative_samples(1);
  gamma_d2_ = curvature_series_.derivative_samples(2);
  if (tangent_angle.empty()) {
    H_.resize(M);
    for (std::size_t i = 0; i < M; ++i) H_[i] = base_angle_ - curvature_series_.integral(arc(i));
  } else {
    if (tangent_angle.size() != M) throw PreconditionError("tangent angle sample count mismatch");
    H_ = std::move(tangent_angle);
  }
  for (double g : gamma_) gamma_plus_ = std::max(gamma_plus_, std::abs(g));

  const double total = total_curvature();
  if (std::abs(total + 2 * kPi) > 1e-6) {
    if (std::abs(total - 2 * kPi) <= 1e-6) throw PreconditionError("curve is clockwise (total curvature +2 pi)");
    throw PreconditionError("total curvature " + fmt_num(total) + " differs from -2 pi: not a simple CCW loop");
  }
  if (closure_residual_ > 1e-6 * length_)
    throw PreconditionError("curve does not close: residual " + fmt_num(closure_residual_));
  area_ = enclosed_area(*this);
  if (!(area_ > 0.0)) throw PreconditionError("enclosed area is not positive");
}

Point LoopCurve::position(double s) const { return {x_series_.value(s), y_series_.value(s)}; }

double LoopCurve::angle(double s) const { return base_angle_ - curvature_series_.integral(s); }

Point LoopCurve::tangent(double s) const {
  const double h = angle(s);
  return {std::cos(h), std::sin(h)};
}

Point LoopCurve::tangent(std::size_t i) const { return {std::cos(H_[i]), std::sin(H_[i])}; }

CurvatureJet LoopCurve::jet(double s) const {
  return {curvature_series_.value(s), curvature_series_.derivative(s, 1), curvature_series_.derivative(s, 2)};
}

CurvatureJet LoopCurve::jet(std::size_t i) const { return {gamma_[i], gamma_d1_[i], gamma_d2_[i]}; }

double LoopCurve::strip_halfwidth() const {
  std::call_once(cache_->once, [this] { cache_->a1 = injectivity_halfwidth(*this, 1.0 / gamma_plus_); });
  return cache_->a1;
}

LoopCurve from_samples(std::span<const Point> points, std::size_t M, Interpolation mode) {
  validate_polygon(points);
  if (M < 16) throw PreconditionError("M must be at least 16");
  std::vector<double> px(points.size()), py(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    px[i] = points[i].x;
    py[i] = points[i].y;
  }
  std::unique_ptr<ParametricCurve> c;
  if (mode == Interpolation::Fourier)
    c = std::make_unique<FourierCurve>(px, py);
  else
    c = std::make_unique<SplineCurve>(px, py);
  auto a = reparametrize(*c, points.size(), M);
  if (mode == Interpolation::CubicSpline) {
    // Spline curvature is only C0 across knots, so its sampled mean misses
    // -2 pi / L by O(n^-2); shift uniformly (well inside the spline's own error).
    double mean = 0.0;
    for (double g : a.gamma) mean += g;
    mean /= static_cast<double>(M);
    const double shift = -2 * kPi / a.length - mean;
    if (std::abs(shift) * a.length < 1e-2)
      for (double& g : a.gamma) g += shift;
  }
  if (mode == Interpolation::Fourier)
    return LoopCurve(a.length, std::move(a.x), std::move(a.y), a.base_angle, std::move(a.gamma));
  return LoopCurve(a.length, std::move(a.x), std::move(a.y), a.base_angle, std::move(a.gamma), 0.0, std::move(a.H));
}

double closure_residual(const std::function<double(double)>& gamma, double length, std::size_t M) {
  return reconstruct(gamma, length, M, {}, 0.0).residual;
}

LoopCurve from_curvature(const std::function<double(double)>& gamma, double length, std::size_t M, Point base_point,
                         double base_angle) {
  if (!(length > 0.0)) throw PreconditionError("length must be positive");
  if (M < 16) throw PreconditionError("M must be at least 16");
  auto r = reconstruct(gamma, length, M, base_point, base_angle);
  if (r.residual > 1e-6 * length)
    throw PreconditionError("curve does not close: residual " + fmt_num(r.residual) + " > 1e-6 L");
  return LoopCurve(length, std::move(r.x), std::move(r.y), base_angle, std::move(r.gamma), r.residual);
}

LoopCurve from_curvature(std::span<const double> gamma_samples, double length, std::size_t M, Point base_point,
                         double base_angle) {
  PeriodicSeries g(gamma_samples, length);
  return from_curvature([&g](double s) { return g.value(s); }, length, M, base_point, base_angle);
}

LoopCurve circle(double R, std::size_t M, Point center) {
  if (!(R > 0.0)) throw PreconditionError("radius must be positive");
  // Exact curvature; resampling a polygon would leave roundoff that gamma'' amplifies by M^2.
  return from_curvature([R](double) { return -1.0 / R; }, 2 * kPi * R, M, {center.x + R, center.y}, kPi / 2);
}

LoopCurve ellipse(double a, double b, std::size_t M) {
  if (!(a > 0.0 && b > 0.0)) throw PreconditionError("semi-axes must be positive");
  // Oversample the parameter so that arc-length resampling stays spectrally accurate.
  const std::size_t n = std::max<std::size_t>(M, 256);
  std::vector<Point> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2 * kPi * static_cast<double>(i) / static_cast<double>(n);
    pts[i] = {a * std::cos(t), b * std::sin(t)};
  }
  return from_samples(pts, M);
}

LoopCurve wiggly(std::size_t M, double amplitude, int lobes) {
  const double L = 2 * kPi;
  auto g = [=](double s) { return -1.0 + amplitude * std::cos(lobes * s); };
  return from_curvature(g, L, M);
}

double enclosed_area(const LoopCurve& c) {
  const std::size_t M = c.size();
  const double ds = c.length() / static_cast<double>(M);
  PeriodicSeries xs(c.x(), c.length()), ys(c.y(), c.length());
  const auto dx = xs.derivative_samples(1);
  const auto dy = ys.derivative_samples(1);
  double green = 0.0;
  for (std::size_t i = 0; i < M; ++i) green += c.x()[i] * dy[i] - c.y()[i] * dx[i];
  green *= 0.5 * ds;
  const double phase = phase_T_samples(c, 1.0).back();
  if (std::abs(green - phase) > 1e-8 * std::abs(green))
    throw PreconditionError("area quadratures disagree: Green " + fmt_num(green) + " vs phase " + fmt_num(phase));
  return green;
}

std::vector<double> phase_T_samples(const LoopCurve& c, double B) {
  const std::size_t M = c.size();
  std::vector<double> g(M);
  for (std::size_t i = 0; i < M; ++i) {
    const Point t = c.tangent(i);
    g[i] = c.y()[i] * t.x - t.y * c.x()[i];
  }
  PeriodicSeries gs(g, c.length());
  std::vector<double> T(M + 1);
  for (std::size_t i = 0; i < M; ++i) T[i] = -0.5 * B * gs.integral(c.arc(i));
  T[M] = -0.5 * B * gs.mean() * c.length();
  return T;
}

double phase_T(const LoopCurve& c, double B, double s) {
  const double L = c.length();
  if (s < -1e-12 * L || s > L * (1 + 1e-12)) throw PreconditionError("phase_T: s outside [0, L]");
  const std::size_t M = c.size();
  std::vector<double> g(M);
  for (std::size_t i = 0; i < M; ++i) {
    const Point t = c.tangent(i);
    g[i] = c.y()[i] * t.x - t.y * c.x()[i];
  }
  PeriodicSeries gs(g, L);
  if (s >= L) return -0.5 * B * gs.mean() * L;
  return -0.5 * B * gs.integral(std::max(s, 0.0));
}

namespace {

Point strip_unchecked(Point p, Point t, double u) { return {p.x - u * t.y, p.y + u * t.x}; }

void check_u(const LoopCurve& c, double u) {
  if (std::abs(u) >= c.strip_halfwidth())
    throw PreconditionError("|u| = " + fmt_num(std::abs(u)) + " beyond strip half-width " +
                            fmt_num(c.strip_halfwidth()));
}

}  // namespace

Point strip_point(const LoopCurve& c, double s, double u) {
  if (u != 0.0) check_u(c, u);
  return strip_unchecked(c.position(s), c.tangent(s), u);
}

Point strip_point(const LoopCurve& c, std::size_t i, double u) {
  if (u != 0.0) check_u(c, u);
  return strip_unchecked(c.position(i), c.tangent(i), u);
}

double injectivity_halfwidth(const LoopCurve& c, double a_max) {
  if (!(a_max > 0.0)) throw PreconditionError("a_max must be positive");
  const std::size_t M = c.size();
  const double res = 1e-3 * c.length();
  // Nearest-point test: the normal segment of length a at every sample must
  // end no closer to any curve sample than a. This implies injectivity of the
  // strip map on |u| <= a and is monotone in a.
  auto feasible = [&](double a) {
    if (a * c.gamma_plus() >= 1.0) return false;
    const double thresh = a * a * (1 - 1e-9);
    for (std::size_t i = 0; i < M; ++i) {
      const Point t = c.tangent(i);
      for (double u : {a, -a}) {
        const Point q = strip_unchecked(c.position(i), t, u);
        for (std::size_t j = 0; j < M; ++j) {
          const double dx = q.x - c.x()[j], dy = q.y - c.y()[j];
          if (dx * dx + dy * dy < thresh) return false;
        }
      }
    }
    return true;
  };
  if (feasible(a_max)) return a_max;
  double lo = 0.0, hi = a_max;
  while (hi - lo > res) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  if (lo <= 0.0) throw PreconditionError("no injective strip above resolution 1e-3 L");
  return lo;
}

double effective_potential(const CurvatureJet& j, double u) {
  const double J = 1.0 + u * j.gamma;
  if (!(J > 0.0)) throw PreconditionError("effective potential evaluated where 1 + u gamma <= 0");
  const double Ji = 1.0 / J;
  return 0.5 * Ji * Ji * Ji * u * j.d2 - 1.25 * Ji * Ji * Ji * Ji * u * u * j.d1 * j.d1 - 0.25 * Ji * Ji * j.gamma * j.gamma;
}

double effective_potential(const LoopCurve& c, double s, double u) { return effective_potential(c.jet(s), u); }

double effective_potential(const LoopCurve& c, std::size_t i, double u) { return effective_potential(c.jet(i), u); }

}  // namespace deltaloop::geometry
