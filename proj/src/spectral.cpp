#include "deltaloop/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace deltaloop {

namespace {

using cd = std::complex<double>;

// (i w)^order for small nonnegative orders.
cd ipow(double w, int order) {
  switch (order) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, w};
    case 2: return {-w * w, 0.0};
    case 3: return {0.0, -w * w * w};
    case 4: return {w * w * w * w, 0.0};
    default: return std::pow(cd(0.0, w), order);
  }
}

// Signed frequency index of FFT slot i for length n.
long signed_index(std::size_t i, std::size_t n) {
  return i <= n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
}

}  // namespace

std::vector<cd> normalized_dft(std::span<const double> samples) {
  Eigen::FFT<double> fft;
  std::vector<double> in(samples.begin(), samples.end());
  std::vector<cd> out;
  fft.fwd(out, in);
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (auto& c : out) c *= inv;
  return out;
}

std::vector<double> inverse_dft_real(std::span<const cd> coeffs) {
  Eigen::FFT<double> fft;
  std::vector<cd> in(coeffs.begin(), coeffs.end());
  std::vector<cd> out;
  fft.inv(out, in);
  std::vector<double> res(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) res[i] = out[i].real() * static_cast<double>(out.size());
  return res;
}

PeriodicSeries::PeriodicSeries(std::span<const double> samples, double period)
    : samples_(samples.begin(), samples.end()), period_(period) {
  if (samples_.size() < 2) throw std::invalid_argument("PeriodicSeries needs at least 2 samples");
  if (!(period > 0.0)) throw std::invalid_argument("PeriodicSeries period must be positive");
  coeffs_ = normalized_dft(samples_);
}

cd PeriodicSeries::coefficient(long k) const {
  const auto m = static_cast<long>(coeffs_.size());
  if (2 * std::abs(k) > m) return {0.0, 0.0};
  const cd c = coeffs_[static_cast<std::size_t>((k % m + m) % m)];
  if (m % 2 == 0 && 2 * std::abs(k) == m) return 0.5 * c;
  return c;
}

double PeriodicSeries::derivative(double t, int order) const {
  const auto m = static_cast<long>(coeffs_.size());
  const double w0 = 2.0 * std::numbers::pi / period_;
  double acc = mean() * (order == 0 ? 1.0 : 0.0);
  const cd z = std::polar(1.0, w0 * t);
  cd zk = z;
  // c e^{iwt} + conj(c) e^{-iwt} = 2 Re(c e^{iwt}); each derivative multiplies by (iw).
  for (long k = 1; 2 * k <= m; ++k, zk *= z) {
    acc += 2.0 * (coefficient(k) * zk * ipow(w0 * static_cast<double>(k), order)).real();
  }
  return acc;
}

double PeriodicSeries::integral(double t) const {
  const auto m = static_cast<long>(coeffs_.size());
  const double w0 = 2.0 * std::numbers::pi / period_;
  double acc = mean() * t;
  for (long k = 1; 2 * k <= m; ++k) {
    const cd c = coefficient(k);
    const double w = w0 * static_cast<double>(k);
    const cd e = (std::polar(1.0, w * t) - 1.0) / cd(0.0, w);
    acc += 2.0 * (c * e).real();
  }
  return acc;
}

std::vector<cd> PeriodicSeries::spectrum_for(std::size_t n, int order) const {
  const std::size_t m = coeffs_.size();
  if (n < m) throw std::invalid_argument("resample target smaller than native size");
  const double w0 = 2.0 * std::numbers::pi / period_;
  std::vector<cd> spec(n, cd(0.0, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    const long k = signed_index(i, m);
    cd c = coefficient(k);
    const cd d = ipow(w0 * static_cast<double>(k), order);
    c *= d;
    if (m % 2 == 0 && 2 * std::abs(k) == static_cast<long>(m)) {
      // Split Nyquist: half at +m/2, half at -m/2 (coefficient() already halved).
      const cd dneg = ipow(-w0 * static_cast<double>(k), order);
      const cd base = coefficient(k);
      if (n == m) {
        spec[i] += base * d + base * dneg;
      } else {
        spec[static_cast<std::size_t>(k)] += base * d;
        spec[n - static_cast<std::size_t>(k)] += base * dneg;
      }
      continue;
    }
    const std::size_t slot = k >= 0 ? static_cast<std::size_t>(k) : n - static_cast<std::size_t>(-k);
    spec[slot] += c;
  }
  return spec;
}

std::vector<double> PeriodicSeries::resample(std::size_t n, int order) const {
  return inverse_dft_real(spectrum_for(n, order));
}

std::vector<double> PeriodicSeries::derivative_samples(int order) const {
  if (order == 0) return samples_;
  return resample(samples_.size(), order);
}

}  // namespace deltaloop
