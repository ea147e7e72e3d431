#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hillgse/spectral.hpp"

namespace hillgse {

/// Stationary covariance K on the circle [0,1), stored through its Fourier
/// coefficients Khat(n) = Khat(-n) >= 0 for n = 0..max_mode().
///
/// The representation is exactly band-limited: max_mode() = grid_size/2 - 1
/// (the Nyquist mode of the grid is not represented), so every inner product
/// below is a finite sum and sampled paths carry exactly this covariance.
/// Instances are immutable after construction.
class CovarianceKernel {
 public:
  /// Nonnegative spectrum; coeffs[0] > 0 is required. Coefficients beyond
  /// max_mode() are discarded. With normalize = true the spectrum is divided
  /// by coeffs[0] so that int K = 1.
  CovarianceKernel(std::vector<double> coeffs, std::size_t grid_size, bool normalize = false);

  std::size_t grid_size() const noexcept { return grid_size_; }
  std::size_t max_mode() const noexcept { return coeffs_.size() - 1; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }

  /// Khat(n) for any integer n; zero outside the represented band.
  double coefficient(long n) const noexcept;

  /// Khat(0) = int_0^1 K, the variance of the mean mode q0.
  double sigma0_sq() const noexcept { return coeffs_.front(); }

  /// K(0) = sum over all n of Khat(n) = sup |K|.
  double at_zero() const noexcept { return at_zero_; }

  /// Modes with Khat(n) <= spectral_floor() are treated as absent.
  double spectral_floor() const noexcept { return floor_; }
  bool is_represented(std::size_t n) const noexcept { return n < coeffs_.size() && coeffs_[n] > floor_; }

  /// K(x mod 1), evaluated as the finite cosine series.
  double eval(double x) const;
  Grid on_grid() const;

  /// <f, K f> for a grid path f.
  double quad_form(std::span<const double> f) const;

  /// I(f) = <f, K^{-1} f> = sum_n |fhat(n)|^2 / Khat(n). Throws NumericalError
  /// when f carries energy in a mode the kernel does not represent (f is then
  /// outside the Cameron-Martin space).
  double quad_form_inv(std::span<const double> f) const;

  /// (K f)(x) = int K(x-y) f(y) dy, i.e. Khat(n) fhat(n) in Fourier.
  Grid apply(std::span<const double> f) const;

  /// Checks that f has no energy outside the represented band; the message
  /// names the offending mode. Returns normally when f is admissible.
  void require_representable(std::span<const double> f) const;
  void require_representable(std::span<const Complex> fhat) const;

 private:
  std::vector<double> coeffs_;
  std::size_t grid_size_;
  double at_zero_ = 0.0;
  double floor_ = 0.0;
};

/// Periodic Ornstein-Uhlenbeck kernel of mass m: Khat(n) = 1/((2 pi n)^2 + m^2).
CovarianceKernel make_ou_kernel(double mass, std::size_t grid_size, bool normalize = false);

CovarianceKernel make_kernel_from_coeffs(std::vector<double> coeffs, std::size_t grid_size,
                                         bool normalize = false);

/// Closed-form periodic OU covariance (1/2m)(e^{mx}/(e^m-1) - e^{-mx}/(e^{-m}-1)),
/// x in [0,1). The band-limited kernel differs from it by the truncated tail.
double ou_closed_form(double mass, double x);

/// Sum over |n| > max_mode of the OU spectrum, i.e. the sup-norm gap between
/// the band-limited and the closed-form kernel.
double ou_tail_mass(double mass, std::size_t max_mode);

}  // namespace hillgse
