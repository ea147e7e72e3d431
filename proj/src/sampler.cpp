#include "hillgse/sampler.hpp"

#include <cmath>

#include "hillgse/errors.hpp"

namespace hillgse {
namespace {

struct Draw {
  double q0;
  Spectrum tilde;  // half spectrum with c[0] = 0
};

Draw draw_modes(const CovarianceKernel& kernel, SampleRng& rng) {
  const std::size_t n = kernel.grid_size();
  Draw d{0.0, Spectrum(n / 2 + 1, Complex(0.0, 0.0))};
  d.q0 = std::sqrt(kernel.sigma0_sq()) * rng.normal();
  for (std::size_t k = 1; k <= kernel.max_mode(); ++k) {
    const double amp = std::sqrt(0.5 * kernel.coefficient(static_cast<long>(k)));
    const double re = rng.normal();
    const double im = rng.normal();
    d.tilde[k] = Complex(amp * re, amp * im);
  }
  return d;
}

PotentialSample assemble(double q0, Grid tilde, double log_weight) {
  PotentialSample s;
  s.q0 = q0;
  s.values.resize(tilde.size());
  for (std::size_t j = 0; j < tilde.size(); ++j) s.values[j] = tilde[j] + q0;
  s.tilde_values = std::move(tilde);
  s.log_weight = log_weight;
  return s;
}

}  // namespace

PotentialSample make_potential(Grid values) {
  const double q0 = spectral::mean(values);
  PotentialSample s;
  s.q0 = q0;
  s.tilde_values.resize(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) s.tilde_values[j] = values[j] - q0;
  s.values = std::move(values);
  return s;
}

PotentialSample sample(const CovarianceKernel& kernel, SampleRng& rng) {
  Draw d = draw_modes(kernel, rng);
  return assemble(d.q0, spectral::inverse(d.tilde, kernel.grid_size()), 0.0);
}

TiltSpec make_tilt(const CovarianceKernel& kernel, Grid shift) {
  if (shift.size() != kernel.grid_size()) throw ConfigError("sampler: tilt length does not match grid_size");
  TiltSpec t;
  t.shift_spectrum = spectral::forward(shift);
  kernel.require_representable(std::span<const Complex>(t.shift_spectrum));
  // The shift acts on q~ only.
  const double mean = t.shift_spectrum.front().real();
  t.shift_spectrum.front() = 0.0;
  for (double& v : shift) v -= mean;
  t.shift_path = std::move(shift);
  double sum = 0.0;
  for (std::size_t k = kernel.max_mode(); k >= 1; --k) {
    if (kernel.is_represented(k)) sum += 2.0 * std::norm(t.shift_spectrum[k]) / kernel.coefficient(static_cast<long>(k));
  }
  t.rate = 0.5 * sum;
  return t;
}

TiltSpec make_tilt_toward_optimal(const CovarianceKernel& kernel, double lambda, double theta) {
  Grid shift = kernel.on_grid();
  const double scale = theta * lambda / kernel.at_zero();
  for (double& v : shift) v = scale * (v - kernel.sigma0_sq());
  return make_tilt(kernel, std::move(shift));
}

PotentialSample sample_tilted(const CovarianceKernel& kernel, const TiltSpec& tilt, SampleRng& rng) {
  if (tilt.shift_spectrum.size() != kernel.grid_size() / 2 + 1) {
    throw ConfigError("sampler: tilt does not match the kernel grid");
  }
  Draw d = draw_modes(kernel, rng);
  double cross = 0.0;
  for (std::size_t k = kernel.max_mode(); k >= 1; --k) {
    if (!kernel.is_represented(k)) continue;
    const Complex h = tilt.shift_spectrum[k];
    cross += 2.0 * (h.real() * d.tilde[k].real() + h.imag() * d.tilde[k].imag()) / kernel.coefficient(static_cast<long>(k));
    d.tilde[k] += h;
  }
  return assemble(d.q0, spectral::inverse(d.tilde, kernel.grid_size()), -cross - tilt.rate);
}

}  // namespace hillgse
