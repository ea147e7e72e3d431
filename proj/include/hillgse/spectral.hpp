#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace hillgse {

using Complex = std::complex<double>;
using Grid = std::vector<double>;

/// Half spectrum of a real path on a uniform circular grid of N points:
/// c[k], k = 0..N/2, normalized so that f(j/N) = sum_k c[k] e^{2 pi i k j/N}
/// (negative modes implied by Hermitian symmetry).
using Spectrum = std::vector<Complex>;

namespace spectral {

bool is_power_of_two(std::size_t n);

Spectrum forward(std::span<const double> f);

/// Real synthesis on n points from a half spectrum of length n/2+1. The
/// imaginary part of c[0] and c[n/2] is ignored.
Grid inverse(std::span<const Complex> c, std::size_t n);

/// d/dx on [0,1) by spectral differentiation. The Nyquist mode is dropped.
Grid derivative(std::span<const double> f);

/// Periodic antiderivative F(x) = int_0^x f of a mean-zero path, F(0) = 0.
/// The mean of f is ignored.
Grid antiderivative(std::span<const double> f);

/// Trigonometric interpolation onto m >= f.size() points (zero padding).
Grid resample(std::span<const double> f, std::size_t m);

/// L2 norm over [0,1) of the part of f supported on modes |k| <= band.
double band_norm(std::span<const double> f, std::size_t band);

double mean(std::span<const double> f);
double sup_norm(std::span<const double> f);

}  // namespace spectral
}  // namespace hillgse
