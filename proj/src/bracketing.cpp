#include "deltaloop/bracketing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "deltaloop/errors.hpp"
#include "deltaloop/transverse.hpp"

namespace deltaloop::bracketing {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double relative_change(double coarse, double fine) {
  const double d = std::abs(fine - coarse);
  return d == 0.0 ? 0.0 : d / std::max(std::abs(fine), std::abs(coarse));
}

std::vector<double> all_eigenvalues(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense Hermitian eigensolver failed");
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

}  // namespace

std::vector<StripSample> strip_samples(const geometry::LoopCurve& c, std::size_t n_s) {
  std::vector<StripSample> out(n_s);
  for (std::size_t k = 0; k < n_s; ++k) {
    const double s = c.length() * static_cast<double>(k) / static_cast<double>(n_s);
    const auto p = c.position(s);
    const double h = c.angle(s);
    out[k] = {p.x, p.y, std::cos(h), std::sin(h), c.jet(s)};
  }
  return out;
}

double momentum_coefficient(const StripSample& p, double B, double u) {
  const double J = 1.0 + u * p.jet.gamma;
  if (!(J > 0.0)) throw PreconditionError("momentum coefficient evaluated where 1 + u gamma <= 0");
  const double Ji = 1.0 / J;
  const double a2 = p.y + u * p.cos_h;  // Gamma_2 + u Gamma_1'
  const double a1 = p.x - u * p.sin_h;  // Gamma_1 - u Gamma_2'
  const double Q = p.y * p.cos_h - p.x * p.sin_h;
  const double Pp = 1.0 - p.jet.gamma * Q;
  return B * a2 * Ji * p.cos_h - B * a1 * Ji * p.sin_h - B * Ji * Ji * Q + B * Ji * Ji * Pp * u;
}

double w_potential(const StripSample& p, double B, double u) {
  const double J = 1.0 + u * p.jet.gamma;
  const double Ji = 1.0 / J;
  const double c = p.cos_h, sn = p.sin_h;
  const double a2 = p.y + u * c;
  const double a1 = p.x - u * sn;
  const double P = p.y * sn + p.x * c;
  const double Q = p.y * c - p.x * sn;
  const double Pp = 1.0 - p.jet.gamma * Q;  // P' since H' = -gamma
  const double Tp = -0.5 * B * Q;           // T_B'
  const double B2 = B * B;

  double w = geometry::effective_potential(p.jet, u);
  w += 0.25 * Ji * Ji * B2 * u * u * Pp * Pp;
  w += 0.25 * B2 * (p.x * p.x - 2 * u * p.x * sn + p.y * p.y + 2 * u * p.y * c + u * u);
  w += B * a2 * Ji * Tp * c - B * a1 * Ji * Tp * sn;
  w += 0.25 * Ji * Ji * B2 * Q * Q + 0.25 * B2 * P * P;
  w += (B * a2 * Ji * c - B * a1 * Ji * sn - B * Ji * Ji * Q) * 0.5 * B * Pp * u;
  w += (-B * a2 * sn - B * a1 * c) * 0.5 * B * P;
  return w;
}

double w_potential(const geometry::LoopCurve& c, double B, double s, double u) {
  if (!std::isfinite(B)) throw PreconditionError("field strength must be finite");
  if (!(std::abs(u) * c.gamma_plus() < 1.0)) throw PreconditionError("W_B evaluated outside the strip |u| < 1/gamma_plus");
  const auto p = c.position(s);
  const double h = c.angle(s);
  return w_potential(StripSample{p.x, p.y, std::cos(h), std::sin(h), c.jet(s)}, B, u);
}

namespace {

GridMaxima point_maxima(const StripSample& p, double B, double a, int n_u) {
  GridMaxima g;
  const double base = 0.25 * p.jet.gamma * p.jet.gamma;
  for (int k = 0; k < n_u; ++k) {
    const double u = k == (n_u - 1) / 2 ? 0.0 : -a + 2.0 * a * k / (n_u - 1);
    g.N = std::max(g.N, std::abs(momentum_coefficient(p, B, u)));
    g.M = std::max(g.M, std::abs(w_potential(p, B, u) + base));
  }
  return g;
}

void check_u_grid(int n_u) {
  if (n_u < 3 || n_u % 2 == 0) throw PreconditionError("u grid needs an odd count >= 3");
}

}  // namespace

namespace serial {
GridMaxima grid_maxima(const std::vector<StripSample>& samples, double B, double a, int n_u) {
  check_u_grid(n_u);
  GridMaxima g;
  for (const auto& p : samples) {
    const auto q = point_maxima(p, B, a, n_u);
    g.N = std::max(g.N, q.N);
    g.M = std::max(g.M, q.M);
  }
  return g;
}
}  // namespace serial

namespace omp {
GridMaxima grid_maxima(const std::vector<StripSample>& samples, double B, double a, int n_u) {
  check_u_grid(n_u);
  double n = 0.0, m = 0.0;
  const auto count = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for reduction(max : n, m) schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto q = point_maxima(samples[static_cast<std::size_t>(i)], B, a, n_u);
    n = std::max(n, q.N);
    m = std::max(m, q.M);
  }
  return {n, m};
}
}  // namespace omp

BracketConstants bracket_constants(const geometry::LoopCurve& c, double B, double a, int grid_density) {
  const double gp = c.gamma_plus();
  if (!(a > 0.0) || !(2.0 * a * gp < 1.0))
    throw PreconditionError("bracket constants require 0 < a < 1/(2 gamma_plus) = " + fmt(0.5 / gp) + " (got a = " +
                            fmt(a) + ")");
  if (grid_density < 16) throw PreconditionError("grid density must be at least 16");
  auto eval = [&](int ns) {
    const int nu = 2 * std::max(8, ns / 16) + 1;
    return omp::grid_maxima(strip_samples(c, static_cast<std::size_t>(ns)), B, a, nu);
  };
  int ns = grid_density;
  GridMaxima prev = eval(ns);
  for (int refinement = 0; refinement < 2; ++refinement) {
    ns *= 2;
    const GridMaxima next = eval(ns);
    const double change = std::max(relative_change(prev.N, next.N), relative_change(prev.M, next.M));
    if (change < 0.01) {
      BracketConstants k;
      k.a = a;
      k.B = B;
      k.gamma_plus = gp;
      k.N = next.N;
      k.M = next.M;
      k.K_fit = (next.N + next.M) / a;
      k.grid_density = ns;
      k.refinement_change = change;
      return k;
    }
    prev = next;
  }
  throw ConvergenceError("grid maxima for N_B, M_B did not settle to 1% after two refinements");
}

LinearFit fit_linear_constant(const std::vector<double>& a, const std::vector<double>& v) {
  if (a.size() != v.size() || a.empty()) throw PreconditionError("fit needs matching, non-empty samples");
  double aa = 0.0, av = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa += a[i] * a[i];
    av += a[i] * v[i];
    vv += v[i] * v[i];
  }
  if (!(aa > 0.0)) throw PreconditionError("fit needs a nonzero abscissa");
  LinearFit f;
  f.K = av / aa;
  double rr = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rr += (v[i] - f.K * a[i]) * (v[i] - f.K * a[i]);
  f.relative_residual = vv > 0.0 ? std::sqrt(rr / vv) : 0.0;
  return f;
}

USpectrum u_operator_spectrum(const geometry::LoopCurve& c, const BracketConstants& k, int sign, int N, int n_max) {
  if (sign != 1 && sign != -1) throw PreconditionError("sign must be +1 or -1");
  USpectrum u;
  u.sign = sign;
  u.constants = k;
  const double edge = 1.0 - sign * k.a * k.gamma_plus;
  u.kinetic = 1.0 / (edge * edge) + sign * 0.5 * k.N;
  u.shift = sign * (0.5 * k.N + k.M);
  if (!(u.kinetic > 0.0))
    throw PreconditionError("U- is not elliptic at a = " + fmt(k.a) + ", B = " + fmt(k.B) +
                            ": kinetic coefficient (1 + a gamma_plus)^-2 - N_B/2 = " + fmt(u.kinetic));
  u.spectrum = comparison::twisted_spectrum(c, k.B, N, n_max, u.kinetic, u.shift);
  return u;
}

USpectrum u_operator_spectrum(const geometry::LoopCurve& c, double B, double a, int sign, int N, int n_max) {
  return u_operator_spectrum(c, bracket_constants(c, B, a), sign, N, n_max);
}

double a_of_beta(double beta, const BracketOptions& o) {
  if (o.a_override) return *o.a_override;
  return o.a_coeff * std::log(beta) / beta;
}

std::vector<std::string> violated_preconditions(const geometry::LoopCurve& c, double B, double beta,
                                                const BracketOptions& o) {
  std::vector<std::string> v;
  const double a = a_of_beta(beta, o);
  const double gp = c.gamma_plus();
  if (!(a > 0.0)) {
    v.push_back("a(beta) > 0 (a = " + fmt(a) + ")");
    return v;
  }
  const double a1 = c.strip_halfwidth();
  if (!(a < a1)) v.push_back("a(beta) < injectivity half-width " + fmt(a1) + " (a = " + fmt(a) + ")");
  if (!(2.0 * a * gp < 1.0)) v.push_back("a(beta) < 1/(2 gamma_plus) = " + fmt(0.5 / gp) + " (a = " + fmt(a) + ")");
  if (!(beta * a > 8.0 / 3.0)) v.push_back("beta a > 8/3 (beta a = " + fmt(beta * a) + ")");
  if (!(beta * a > 8.0)) v.push_back("a beta > 8 (a beta = " + fmt(beta * a) + ")");
  if (!(3.0 * beta > 8.0 * gp)) v.push_back("beta > 8 gamma_plus / 3 = " + fmt(8.0 * gp / 3.0));
  if (v.empty()) {
    const auto k = bracket_constants(c, B, a, o.grid_density);
    const double kin = 1.0 / ((1.0 + a * gp) * (1.0 + a * gp)) - 0.5 * k.N;
    if (!(kin > 0.0)) v.push_back("U- elliptic ((1 + a gamma_plus)^-2 - N_B(a)/2 = " + fmt(kin) + ")");
  }
  return v;
}

double minimal_admissible_beta(const geometry::LoopCurve& c, double B, double beta_from, const BracketOptions& o) {
  double beta = std::max(beta_from, 1.0 + 1e-9);
  for (int k = 0; k < 1600 && beta < 1e7; ++k, beta *= 1.01)
    if (violated_preconditions(c, B, beta, o).empty()) return beta;
  throw PreconditionError("no admissible beta below 1e7 for this curve and half-width rule");
}

namespace {

void require_admissible(const geometry::LoopCurve& c, double B, double beta, const BracketOptions& o) {
  const auto v = violated_preconditions(c, B, beta, o);
  if (v.empty()) return;
  std::string msg = "bracket preconditions fail at beta = " + fmt(beta) + ", a = " + fmt(a_of_beta(beta, o)) + ":";
  for (const auto& s : v) msg += " [" + s + "]";
  try {
    msg += "; minimal admissible beta for this curve: " + fmt(minimal_admissible_beta(c, B, beta, o));
  } catch (const PreconditionError&) {
    msg += "; no admissible beta found";
  }
  throw PreconditionError(msg);
}

template <class F>
double or_nan(F&& f) {
  try {
    return f();
  } catch (const PreconditionError&) {
    return kNaN;
  }
}

}  // namespace

std::vector<BracketInterval> bracket(const geometry::LoopCurve& c, double B, double beta, int n,
                                     const BracketOptions& o) {
  if (n < 1) throw PreconditionError("bracket needs n >= 1");
  if (o.strict) require_admissible(c, B, beta, o);
  const bool ok = o.strict || violated_preconditions(c, B, beta, o).empty();
  const double a = a_of_beta(beta, o);
  const double gp = c.gamma_plus();

  std::vector<BracketInterval> out(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    auto& r = out[static_cast<std::size_t>(j - 1)];
    r.j = j;
    r.B = B;
    r.beta = beta;
    r.a_used = a;
    r.preconds_ok = ok;
    r.tau_minus = r.tau_plus = r.mu_minus = r.mu_plus = r.zeta_minus = r.zeta_plus = r.N_B = r.M_B = kNaN;
  }

  BracketConstants k;
  try {
    k = bracket_constants(c, B, a, o.grid_density);
  } catch (const PreconditionError&) {
    if (o.strict) throw;
    return out;
  }
  const double zp = or_nan([&] { return transverse::zeta_plus(a, beta).zeta; });
  const double zm = or_nan([&] { return transverse::zeta_minus(a, beta, gp).zeta; });
  // Keep the cutoff well above the highest requested mode.
  const int N = std::max(o.N, n);
  const auto mp = u_operator_spectrum(c, k, +1, N, n).spectrum.eigenvalues;
  std::vector<double> mm(static_cast<std::size_t>(n), kNaN);
  try {
    mm = u_operator_spectrum(c, k, -1, N, n).spectrum.eigenvalues;
  } catch (const PreconditionError&) {
    if (o.strict) throw;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& r = out[i];
    r.N_B = k.N;
    r.M_B = k.M;
    r.zeta_plus = zp;
    r.zeta_minus = zm;
    r.mu_plus = mp[i];
    r.mu_minus = mm[i];
    r.tau_plus = zp + mp[i];
    r.tau_minus = zm + mm[i];
  }
  return out;
}

CountGuarantee count_guarantee(const geometry::LoopCurve& c, double B, double beta, const BracketOptions& o) {
  require_admissible(c, B, beta, o);
  const double a = a_of_beta(beta, o);
  const auto k = bracket_constants(c, B, a, o.grid_density);
  const double zp = transverse::zeta_plus(a, beta).zeta;
  const double edge = 1.0 - a * k.gamma_plus;
  const double kinetic = 1.0 / (edge * edge) + 0.5 * k.N;
  const double shift = 0.5 * k.N + k.M;

  int N = std::max(8, o.N);
  std::vector<double> coarse = all_eigenvalues(comparison::assemble_twisted(c, B, N, kinetic, shift));
  while (coarse.back() + zp < 0.0) {
    if (N >= 2048) throw ConvergenceError("Fourier cutoff exhausted before tau+ turned positive");
    N *= 2;
    coarse = all_eigenvalues(comparison::assemble_twisted(c, B, N, kinetic, shift));
  }
  const auto fine = all_eigenvalues(comparison::assemble_twisted(c, B, 2 * N, kinetic, shift));

  CountGuarantee g;
  g.N = 2 * N;
  // Galerkin values are upper bounds, so counting on the finer basis stays a valid lower bound.
  g.n = static_cast<int>(std::count_if(fine.begin(), fine.begin() + static_cast<std::ptrdiff_t>(coarse.size()),
                                       [&](double m) { return m + zp < 0.0; }));
  const std::size_t upto = std::min<std::size_t>(static_cast<std::size_t>(g.n) + 1, coarse.size());
  for (std::size_t j = 0; j < upto; ++j) g.mu_plus_error = std::max(g.mu_plus_error, std::abs(fine[j] - coarse[j]));
  for (std::size_t j = 0; j < upto; ++j)
    if (std::abs(fine[j] + zp) <= g.mu_plus_error) g.marginal = true;
  return g;
}

}  // namespace deltaloop::bracketing
