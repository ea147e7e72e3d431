#include "hillgse/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hillgse/errors.hpp"

namespace hillgse {
namespace {

constexpr double kFloorRatio = 1e-14;
// Relative energy a path may carry in an unrepresented mode (FFT roundoff).
constexpr double kUnrepresentedEnergy = 1e-20;

}  // namespace

CovarianceKernel::CovarianceKernel(std::vector<double> coeffs, std::size_t grid_size, bool normalize)
    : grid_size_(grid_size) {
  if (!spectral::is_power_of_two(grid_size) || grid_size < 16) {
    throw ConfigError("kernel: grid_size must be a power of two >= 16, got " + std::to_string(grid_size));
  }
  if (coeffs.empty() || !(coeffs.front() > 0.0)) {
    throw ConfigError(
        "kernel: Khat(0) = int K must be positive (the K1 > 0 assumption); kernels without a "
        "mean mode are not supported");
  }
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    if (!(coeffs[n] >= 0.0) || !std::isfinite(coeffs[n])) {
      std::ostringstream msg;
      msg << "kernel: coefficient " << n << " is " << coeffs[n] << "; a covariance spectrum must be nonnegative";
      throw ConfigError(msg.str());
    }
  }
  const std::size_t max_mode = grid_size / 2 - 1;
  coeffs.resize(max_mode + 1, 0.0);
  if (normalize) {
    const double c0 = coeffs.front();
    for (double& c : coeffs) c /= c0;
  }
  coeffs_ = std::move(coeffs);
  floor_ = kFloorRatio * *std::max_element(coeffs_.begin(), coeffs_.end());
  at_zero_ = coeffs_.front();
  for (std::size_t n = 1; n < coeffs_.size(); ++n) at_zero_ += 2.0 * coeffs_[n];
}

double CovarianceKernel::coefficient(long n) const noexcept {
  const auto k = static_cast<std::size_t>(n < 0 ? -n : n);
  return k < coeffs_.size() ? coeffs_[k] : 0.0;
}

double CovarianceKernel::eval(double x) const {
  x -= std::floor(x);
  const double theta = 2.0 * std::numbers::pi * x;
  double sum = 0.0;
  // Sum the small tail first.
  for (std::size_t n = coeffs_.size() - 1; n >= 1; --n) sum += 2.0 * coeffs_[n] * std::cos(theta * static_cast<double>(n));
  return sum + coeffs_.front();
}

Grid CovarianceKernel::on_grid() const {
  Spectrum c(grid_size_ / 2 + 1, Complex(0.0, 0.0));
  for (std::size_t n = 0; n < coeffs_.size(); ++n) c[n] = coeffs_[n];
  return spectral::inverse(c, grid_size_);
}

void CovarianceKernel::require_representable(std::span<const Complex> fhat) const {
  double total = 0.0;
  for (std::size_t n = 0; n < fhat.size(); ++n) total += std::norm(fhat[n]);
  for (std::size_t n = 0; n < fhat.size(); ++n) {
    if (is_represented(n)) continue;
    if (std::norm(fhat[n]) > kUnrepresentedEnergy * total) {
      std::ostringstream msg;
      msg << "path not in Cameron-Martin space: energy " << std::norm(fhat[n]) << " in mode " << n
          << " where Khat <= spectral floor " << floor_;
      throw NumericalError("kernel", msg.str());
    }
  }
}

void CovarianceKernel::require_representable(std::span<const double> f) const {
  if (f.size() != grid_size_) throw ConfigError("kernel: path length does not match grid_size");
  const Spectrum fhat = spectral::forward(f);
  require_representable(fhat);
}

double CovarianceKernel::quad_form_inv(std::span<const double> f) const {
  if (f.size() != grid_size_) throw ConfigError("kernel: path length does not match grid_size");
  const Spectrum fhat = spectral::forward(f);
  require_representable(fhat);
  double sum = 0.0;
  for (std::size_t n = coeffs_.size(); n-- > 0;) {
    if (!is_represented(n)) continue;
    sum += (n == 0 ? 1.0 : 2.0) * std::norm(fhat[n]) / coeffs_[n];
  }
  return sum;
}

double CovarianceKernel::quad_form(std::span<const double> f) const {
  if (f.size() != grid_size_) throw ConfigError("kernel: path length does not match grid_size");
  const Spectrum fhat = spectral::forward(f);
  double sum = 0.0;
  for (std::size_t n = coeffs_.size(); n-- > 0;) sum += (n == 0 ? 1.0 : 2.0) * std::norm(fhat[n]) * coeffs_[n];
  return sum;
}

Grid CovarianceKernel::apply(std::span<const double> f) const {
  if (f.size() != grid_size_) throw ConfigError("kernel: path length does not match grid_size");
  Spectrum fhat = spectral::forward(f);
  for (std::size_t n = 0; n < fhat.size(); ++n) fhat[n] *= (n < coeffs_.size() ? coeffs_[n] : 0.0);
  return spectral::inverse(fhat, grid_size_);
}

CovarianceKernel make_ou_kernel(double mass, std::size_t grid_size, bool normalize) {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ConfigError("kernel: OU mass m must be positive");
  if (!spectral::is_power_of_two(grid_size) || grid_size < 16) {
    throw ConfigError("kernel: grid_size must be a power of two >= 16, got " + std::to_string(grid_size));
  }
  std::vector<double> coeffs(grid_size / 2);
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(n);
    coeffs[n] = 1.0 / (w * w + mass * mass);
  }
  return CovarianceKernel(std::move(coeffs), grid_size, normalize);
}

CovarianceKernel make_kernel_from_coeffs(std::vector<double> coeffs, std::size_t grid_size, bool normalize) {
  return CovarianceKernel(std::move(coeffs), grid_size, normalize);
}

double ou_closed_form(double mass, double x) {
  x -= std::floor(x);
  return (std::exp(mass * x) / std::expm1(mass) - std::exp(-mass * x) / std::expm1(-mass)) / (2.0 * mass);
}

double ou_tail_mass(double mass, std::size_t max_mode) {
  // sum over all n of 1/((2 pi n)^2 + m^2) = coth(m/2)/(2m)
  double partial = 1.0 / (mass * mass);
  for (std::size_t n = 1; n <= max_mode; ++n) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(n);
    partial += 2.0 / (w * w + mass * mass);
  }
  return 1.0 / (2.0 * mass * std::tanh(0.5 * mass)) - partial;
}

}  // namespace hillgse
