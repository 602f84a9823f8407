#pragma once

#include <complex>
#include <span>
#include <vector>

namespace deltaloop {

/// Trigonometric interpolant of a real periodic function given by uniform
/// samples f(i*P/M), i = 0..M-1, on a period P.
///
/// The Nyquist mode (even M) is split symmetrically so that the interpolant
/// stays real and derivatives of real data stay real.
class PeriodicSeries {
 public:
  PeriodicSeries() = default;
  PeriodicSeries(std::span<const double> samples, double period);

  [[nodiscard]] std::size_t size() const { return samples_.size(); }
  [[nodiscard]] double period() const { return period_; }
  [[nodiscard]] std::span<const double> samples() const { return samples_; }

  /// Mean value over one period (the k = 0 coefficient).
  [[nodiscard]] double mean() const { return coeffs_.empty() ? 0.0 : coeffs_[0].real(); }

  [[nodiscard]] double value(double t) const { return derivative(t, 0); }
  [[nodiscard]] double derivative(double t, int order) const;

  /// Integral from 0 to t (t may exceed one period; the mean contributes
  /// linearly).
  [[nodiscard]] double integral(double t) const;

  /// Samples of the order-th derivative on the native grid.
  [[nodiscard]] std::vector<double> derivative_samples(int order) const;

  /// Interpolant evaluated at n >= size() uniform points (zero padding).
  [[nodiscard]] std::vector<double> resample(std::size_t n, int order = 0) const;

  /// Complex Fourier coefficient c_k with f(t) = sum_k c_k exp(2 pi i k t / P),
  /// |k| <= M/2, zero beyond.
  [[nodiscard]] std::complex<double> coefficient(long k) const;

 private:
  [[nodiscard]] std::vector<std::complex<double>> spectrum_for(std::size_t n, int order) const;

  std::vector<double> samples_;
  std::vector<std::complex<double>> coeffs_;  // FFT order, already divided by M
  double period_ = 1.0;
};

/// Forward DFT of real samples, normalized by 1/M (so entry k is c_k for
/// k < M/2 and c_{k-M} above).
std::vector<std::complex<double>> normalized_dft(std::span<const double> samples);

/// Real part of sum_k c_k exp(2 pi i k j / M) for j = 0..M-1 (inverse of normalized_dft).
std::vector<double> inverse_dft_real(std::span<const std::complex<double>> coeffs);

}  // namespace deltaloop
