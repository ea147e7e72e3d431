#include <doctest.h>

#include <cmath>
#include <vector>

#include "hillgse/sampler.hpp"
#include "oracles.hpp"

using namespace hillgse;

namespace {

struct Stat {
  double mean = 0.0, se = 0.0;
};

Stat stat(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - m) * (v - m);
  var /= static_cast<double>(x.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(x.size()))};
}

}  // namespace

TEST_SUITE("sampler") {
  TEST_CASE("constant kernel gives constant paths with unit variance") {
    const CovarianceKernel k = make_kernel_from_coeffs({1.0}, 64);
    std::vector<double> q0(100000);
    for (std::size_t i = 0; i < q0.size(); ++i) {
      SampleRng rng(1, 0, i);
      const PotentialSample s = sample(k, rng);
      if (i < 10) CHECK(oracle::sup_abs_diff(s.values, Grid(64, s.q0)) < 1e-14);
      q0[i] = s.q0;
    }
    double var = 0.0;
    for (double v : q0) var += v * v;
    var /= static_cast<double>(q0.size());
    CHECK(std::abs(var - 1.0) < 0.02);
  }

  TEST_CASE("sample structure: q = q0 + q~ with mean-zero q~, zero log-weight") {
    const CovarianceKernel k = make_ou_kernel(1.0, 512);
    for (std::uint64_t i = 0; i < 20; ++i) {
      SampleRng rng(5, 2, i);
      const PotentialSample s = sample(k, rng);
      CHECK(std::abs(spectral::mean(s.tilde_values)) <= 1e-12 * spectral::sup_norm(s.values));
      for (std::size_t j = 0; j < s.values.size(); ++j) CHECK(s.values[j] == s.tilde_values[j] + s.q0);
      CHECK(s.log_weight == 0.0);
      CHECK(s.q0 == doctest::Approx(spectral::mean(s.values)).epsilon(1e-12));
    }
  }

  TEST_CASE("OU covariance reproduction on an 8-point subgrid") {
    const CovarianceKernel k = make_ou_kernel(1.0, 512);
    const std::size_t n = 100000;
    std::vector<std::vector<double>> pts(n, std::vector<double>(8));
    for (std::size_t i = 0; i < n; ++i) {
      SampleRng rng(42, 7, i);
      const PotentialSample s = sample(k, rng);
      for (int a = 0; a < 8; ++a) pts[i][a] = s.values[64 * a];
    }
    int outside = 0;
    for (int a = 0; a < 8; ++a) {
      for (int b = a; b < 8; ++b) {
        std::vector<double> prod(n);
        for (std::size_t i = 0; i < n; ++i) prod[i] = pts[i][a] * pts[i][b];
        const Stat st = stat(prod);
        const double target = k.eval((b - a) / 8.0);
        if (std::abs(st.mean - target) > 5.0 * st.se) ++outside;
        if (a == 0 && (b == 0 || b == 2 || b == 4)) {
          // x in {0, 0.25, 0.5} at 4 standard errors.
          CHECK(std::abs(st.mean - target) < 4.0 * st.se);
        }
      }
    }
    CHECK(outside == 0);
  }

  TEST_CASE("determinism: same (seed, stream, index) gives identical paths") {
    const CovarianceKernel k = make_ou_kernel(1.0, 256);
    SampleRng a(9, 1, 123), b(9, 1, 123), c(9, 1, 124);
    const Grid x = sample(k, a).values, y = sample(k, b).values, z = sample(k, c).values;
    CHECK(x == y);
    CHECK(x != z);
  }

  TEST_CASE("tilts toward the optimal potential") {
    const CovarianceKernel ou = make_ou_kernel(1.0, 512);
    const TiltSpec zero = make_tilt_toward_optimal(ou, 0.0);
    CHECK(zero.rate == 0.0);
    CHECK(spectral::sup_norm(zero.shift_path) == 0.0);

    const CovarianceKernel c = make_kernel_from_coeffs({1.0}, 64);
    const TiltSpec flat = make_tilt_toward_optimal(c, -7.0);
    CHECK(spectral::sup_norm(flat.shift_path) < 1e-15);
    CHECK(flat.rate == doctest::Approx(0.0));

    // rate = lambda^2 (K(0) - 1) / (2 K(0)^2), the direct spectral sum.
    const TiltSpec t = make_tilt_toward_optimal(ou, -10.0);
    double direct = 0.0;
    for (std::size_t n = 1; n <= ou.max_mode(); ++n) direct += 2.0 * ou.coefficient(n);  // sum Khat^2/Khat
    direct *= 100.0 / (2.0 * ou.at_zero() * ou.at_zero());
    CHECK(t.rate == doctest::Approx(direct).epsilon(1e-10));
    CHECK(t.rate == doctest::Approx(0.5 * ou.quad_form_inv(t.shift_path)).epsilon(1e-12));
    const double K0 = oracle::ou_K0_closed(1.0);
    CHECK(100.0 * (K0 - 1.0) / (2.0 * K0 * K0) == doctest::Approx(3.50126).epsilon(1e-5));
    CHECK(std::abs(t.rate - 3.5007) < 0.01);  // band-limited K(0) differs in the 4th digit
  }

  TEST_CASE("zero tilt leaves the weight at zero") {
    const CovarianceKernel ou = make_ou_kernel(1.0, 256);
    const TiltSpec zero = make_tilt_toward_optimal(ou, 0.0);
    for (std::uint64_t i = 0; i < 10; ++i) {
      SampleRng rng(3, 0, i);
      CHECK(sample_tilted(ou, zero, rng).log_weight == 0.0);
    }
  }

  TEST_CASE("likelihood ratios average to one and reweighting is unbiased") {
    const CovarianceKernel ou = make_ou_kernel(1.0, 512);
    const TiltSpec t = make_tilt_toward_optimal(ou, -6.0);
    const std::size_t n = 100000;
    std::vector<double> w(n), tilted(n), plain(n);
    for (std::size_t i = 0; i < n; ++i) {
      SampleRng rng(21, 1, i);
      const PotentialSample s = sample_tilted(ou, t, rng);
      w[i] = std::exp(s.log_weight);
      Grid d(s.tilde_values.size());
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = s.tilde_values[j] - t.shift_path[j];
      tilted[i] = w[i] * (spectral::sup_norm(d) < 2.0 ? 1.0 : 0.0);
      SampleRng rng2(21, 2, i);
      const PotentialSample p = sample(ou, rng2);
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = p.tilde_values[j] - t.shift_path[j];
      plain[i] = spectral::sup_norm(d) < 2.0 ? 1.0 : 0.0;
    }
    const Stat sw = stat(w);
    CHECK(std::abs(sw.mean - 1.0) < 4.0 * sw.se);
    const Stat a = stat(tilted), b = stat(plain);
    CHECK(std::abs(a.mean - b.mean) < 3.0 * std::hypot(a.se, b.se));
  }

  TEST_CASE("random tilts reweight a bounded functional without bias") {
    const CovarianceKernel ou = make_ou_kernel(1.0, 256);
    const std::size_t n = 20000;
    auto functional = [](const Grid& q) { return std::tanh(q[0] + 0.5 * q[64]); };
    std::vector<double> plain(n);
    for (std::size_t i = 0; i < n; ++i) {
      SampleRng rng(8, 100, i);
      plain[i] = functional(sample(ou, rng).tilde_values);
    }
    const Stat b = stat(plain);
    int disagreements = 0;
    for (std::uint64_t t = 0; t < 10; ++t) {
      SampleRng srng(8, 200, t);
      Grid shift = sample(ou, srng).tilde_values;
      for (double& v : shift) v *= 0.5;
      const TiltSpec tilt = make_tilt(ou, shift);
      CHECK(tilt.rate >= 0.0);
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) {
        SampleRng rng(8, 300 + t, i);
        const PotentialSample s = sample_tilted(ou, tilt, rng);
        x[i] = std::exp(s.log_weight) * functional(s.tilde_values);
      }
      const Stat a = stat(x);
      if (std::abs(a.mean - b.mean) > 4.0 * std::hypot(a.se, b.se)) ++disagreements;
    }
    CHECK(disagreements == 0);
  }
}
