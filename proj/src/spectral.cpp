#include "hillgse/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hillgse::spectral {
namespace {

// FFTW planning is not thread-safe; execution on new arrays is. Plans are
// created once per size under a lock and reused with the new-array execute API.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan r2c(std::size_t n) { return get(n, true); }
  fftw_plan c2r(std::size_t n) { return get(n, false); }

 private:
  fftw_plan get(std::size_t n, bool forward) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, forward);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    double* real = fftw_alloc_real(n);
    fftw_complex* cplx = fftw_alloc_complex(n / 2 + 1);
    const int len = static_cast<int>(n);
    fftw_plan plan = forward
        ? fftw_plan_dft_r2c_1d(len, real, cplx, FFTW_ESTIMATE | FFTW_UNALIGNED)
        : fftw_plan_dft_c2r_1d(len, cplx, real, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(real);
    fftw_free(cplx);
    if (plan == nullptr) throw std::runtime_error("spectral: FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans_;
};

PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

void require_even(std::size_t n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("spectral: grid size must be even and >= 2");
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Spectrum forward(std::span<const double> f) {
  const std::size_t n = f.size();
  require_even(n);
  Grid in(f.begin(), f.end());
  Spectrum out(n / 2 + 1);
  fftw_execute_dft_r2c(plans().r2c(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& c : out) c *= scale;
  return out;
}

Grid inverse(std::span<const Complex> c, std::size_t n) {
  require_even(n);
  if (c.size() != n / 2 + 1) throw std::invalid_argument("spectral: half spectrum has wrong length");
  Spectrum in(c.begin(), c.end());
  in.front().imag(0.0);
  in.back().imag(0.0);
  Grid out(n);
  fftw_execute_dft_c2r(plans().c2r(n), reinterpret_cast<fftw_complex*>(in.data()), out.data());
  return out;
}

Grid derivative(std::span<const double> f) {
  Spectrum c = forward(f);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= Complex(0.0, two_pi * static_cast<double>(k));
  c.back() = 0.0;
  return inverse(c, f.size());
}

Grid antiderivative(std::span<const double> f) {
  Spectrum c = forward(f);
  const double two_pi = 2.0 * std::numbers::pi;
  c.front() = 0.0;
  c.back() = 0.0;
  for (std::size_t k = 1; k + 1 < c.size(); ++k) c[k] /= Complex(0.0, two_pi * static_cast<double>(k));
  Grid out = inverse(c, f.size());
  const double offset = out.front();
  for (double& v : out) v -= offset;
  return out;
}

Grid resample(std::span<const double> f, std::size_t m) {
  const std::size_t n = f.size();
  if (m < n || m % 2 != 0) throw std::invalid_argument("spectral: resample target must be even and >= source");
  Spectrum c = forward(f);
  // A real Nyquist coefficient stands for cos(pi n x); split it across +-n/2.
  c.back() *= 0.5;
  c.resize(m / 2 + 1, Complex(0.0, 0.0));
  if (m == n) c.back() *= 2.0;
  return inverse(c, m);
}

double band_norm(std::span<const double> f, std::size_t band) {
  const Spectrum c = forward(f);
  const std::size_t top = std::min(band, c.size() - 1);
  double sum = std::norm(c[0]);
  for (std::size_t k = 1; k <= top; ++k) sum += (k + 1 == c.size() ? 1.0 : 2.0) * std::norm(c[k]);
  return std::sqrt(sum);
}

double mean(std::span<const double> f) {
  if (f.empty()) return 0.0;
  double sum = 0.0;
  for (double v : f) sum += v;
  return sum / static_cast<double>(f.size());
}

double sup_norm(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace hillgse::spectral
