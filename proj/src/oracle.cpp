#include "deltaloop/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "deltaloop/errors.hpp"

namespace deltaloop::oracle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEuler = std::numbers::egamma;
constexpr double kEps = 1e-17;

// K_0, K_1 for 0 < x <= 2 from the logarithmic series.
void k01_series(double x, double& k0, double& k1) {
  const double q = 0.25 * x * x;
  const double lg = std::log(0.5 * x);
  double term = 1.0;  // q^k / (k!)^2
  double harm = 0.0;  // H_k
  double i0 = 0.0, s0 = 0.0;
  double term1 = 1.0;  // q^k / (k! (k+1)!)
  double i1 = 0.0, s1 = 0.0;
  for (int k = 0; k < 60; ++k) {
    if (k > 0) {
      harm += 1.0 / k;
      term *= q / (static_cast<double>(k) * k);
      term1 *= q / (static_cast<double>(k) * (k + 1));
    }
    i0 += term;
    s0 += term * harm;
    i1 += term1;
    // psi(k+1) + psi(k+2) = -2 gamma + 2 H_k + 1/(k+1)
    s1 += term1 * (-2 * kEuler + 2 * harm + 1.0 / (k + 1));
    if (term < kEps * i0 && term1 < kEps * i1) break;
  }
  i1 *= 0.5 * x;
  k0 = -(lg + kEuler) * i0 + s0;
  k1 = 1.0 / x + lg * i1 - 0.25 * x * s1;
}

// Steed's method for the second continued fraction, order 0 (Temme's form).
void k01_steed(double x, double& k0, double& k1) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < 100000; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h = a1 * h;
  k0 = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
  k1 = k0 * (x + 0.5 - h) / x;
}

// Hankel asymptotic expansion, truncated at the smallest term.
double k_hankel(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double f = (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * x);
    if (std::abs(term * f) >= std::abs(term)) break;
    term *= f;
    sum += term;
    if (std::abs(term) < kEps * std::abs(sum)) break;
  }
  return std::sqrt(kPi / (2.0 * x)) * std::exp(-x) * sum;
}

// I_{m+1}(x) / I_m(x) by Miller's downward recurrence from a high start order.
double i_ratio(int m, double x) {
  const int start = m + 40 + static_cast<int>(x + 12.0 * std::sqrt(x));
  double ip = 0.0, ic = 1.0;  // I_{n+1}, I_n up to scale
  double ratio = 0.0;
  for (int n = start; n > m; --n) {
    const double im = ip + (2.0 * n / x) * ic;
    ip = ic;
    ic = im;
    if (std::abs(ic) > 1e250) {
      ip *= 1e-250;
      ic *= 1e-250;
    }
  }
  ratio = ip / ic;
  return ratio;
}

}  // namespace

double BesselPair::wronskian_defect() const { return std::abs(x * (I * K1 + I1 * K) - 1.0); }

BesselPair bessel_ik(int m, double x) {
  if (m < 0 || m > 10) throw PreconditionError("bessel_ik: order out of range [0, 10]");
  if (!(x > 0.0) || x > 100.0) throw PreconditionError("bessel_ik: argument out of range (0, 100]");
  double k0, k1;
  if (x <= 2.0) {
    k01_series(x, k0, k1);
  } else if (x < 25.0) {
    k01_steed(x, k0, k1);
  } else {
    k0 = k_hankel(0, x);
    k1 = k_hankel(1, x);
  }
  double km = k0, kn = k1;  // K_n, K_{n+1}
  for (int n = 1; n <= m; ++n) {
    const double next = km + (2.0 * n / x) * kn;
    km = kn;
    kn = next;
  }
  const double r = i_ratio(m, x);
  BesselPair p;
  p.m = m;
  p.x = x;
  p.K = km;
  p.K1 = kn;
  p.I = 1.0 / (x * (kn + r * km));
  p.I1 = r * p.I;
  return p;
}

double bessel_i_series(int m, double x) {
  const double q = 0.25 * x * x;
  double term = std::pow(0.5 * x, m) / std::tgamma(m + 1.0);
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * (k + m));
    sum += term;
    if (term < kEps * sum) break;
  }
  return sum;
}

double ideal_ring(double L, int n, double phi) {
  if (!(L > 0.0)) throw PreconditionError("ideal_ring: L must be positive");
  const double w = 2 * kPi / L;
  return w * w * (n + phi) * (n + phi);
}

double mu_circle(double R, double B, int j) {
  if (!(R > 0.0)) throw PreconditionError("mu_circle: R must be positive");
  if (j < 1) throw PreconditionError("mu_circle: j must be >= 1");
  const double phi = 0.5 * B * R * R;  // flux B pi R^2 / 2 pi
  const auto center = static_cast<long>(std::floor(phi));
  std::vector<double> v;
  for (long k = center - j - 1; k <= center + j + 1; ++k) {
    const double d = (static_cast<double>(k) - phi) / R;
    v.push_back(d * d - 0.25 / (R * R));
  }
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(j - 1)];
}

CircleLevel circle_delta_2d(double R, double beta, int m) {
  if (!(R > 0.0) || !(beta > 0.0)) throw PreconditionError("circle_delta_2d: R and beta must be positive");
  auto f = [&](double kappa) {
    const auto p = bessel_ik(m, kappa * R);
    if (p.wronskian_defect() > 1e-12)
      throw ConvergenceError("Wronskian defect " + std::to_string(p.wronskian_defect()) + " at x = " +
                             std::to_string(p.x));
    return beta * R * p.I * p.K - 1.0;
  };
  double lo = 1e-8 / R;
  if (f(lo) <= 0.0)
    throw PreconditionError("circle_delta_2d: no bound state in channel m = " + std::to_string(m) +
                            " (needs beta R > 2m)");
  double hi = std::max(beta, 1.0 / R);
  while (f(hi) >= 0.0) {
    hi *= 2.0;
    if (hi * R > 100.0) throw PreconditionError("circle_delta_2d: root beyond Bessel argument range");
  }
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  const double kappa = 0.5 * (lo + hi);
  return {m, kappa, -kappa * kappa};
}

}  // namespace deltaloop::oracle
