#include <doctest.h>

#include <cmath>

#include "hillgse/errors.hpp"
#include "hillgse/kernel.hpp"
#include "hillgse/sampler.hpp"
#include "oracles.hpp"

using namespace hillgse;

TEST_SUITE("kernel") {
  TEST_CASE("OU kernel spectrum and real-space values") {
    const CovarianceKernel k = make_ou_kernel(1.0, 512);
    CHECK(k.sigma0_sq() == 1.0);
    CHECK(k.max_mode() == 255);
    CHECK(k.coefficient(3) == doctest::Approx(1.0 / (std::pow(6 * oracle::kPi, 2) + 1)).epsilon(1e-15));
    CHECK(k.coefficient(-3) == k.coefficient(3));
    CHECK(k.coefficient(256) == 0.0);
    // Band-limited K(0) is the partial sum; the closed form adds the tail.
    CHECK(k.at_zero() == doctest::Approx(oracle::ou_partial_sum(1.0, 255)).epsilon(1e-14));
    CHECK(k.eval(0.0) == doctest::Approx(k.at_zero()).epsilon(1e-14));
    CHECK(std::abs(oracle::ou_K0_closed(1.0) - 1.081977) < 1e-6);
    CHECK(k.at_zero() + ou_tail_mass(1.0, 255) == doctest::Approx(oracle::ou_K0_closed(1.0)).epsilon(1e-13));
    // Real-space values against the closed form, within the truncated tail.
    for (double x : {0.0, 0.1, 0.3, 0.5, 0.9}) {
      CHECK(std::abs(k.eval(x) - ou_closed_form(1.0, x)) <= ou_tail_mass(1.0, 255) + 1e-12);
    }
    CHECK(k.eval(0.3) == doctest::Approx(k.eval(0.7)).epsilon(1e-14));
    CHECK(k.eval(1.3) == doctest::Approx(k.eval(0.3)).epsilon(1e-14));
    // Right-tail constant 1/(2 Khat(0)) = m^2/2 at m = 2.
    CHECK(0.5 / make_ou_kernel(2.0, 256).sigma0_sq() == doctest::Approx(2.0));
  }

  TEST_CASE("closed form of the OU kernel integrates to 1/m^2") {
    // Midpoint rule on the closed form, an oracle independent of the spectrum.
    const int n = 200000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += ou_closed_form(1.0, (i + 0.5) / n);
    CHECK(acc / n == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("kernels from coefficients") {
    const CovarianceKernel c = make_kernel_from_coeffs({1.0}, 64);
    for (double x : {0.0, 0.25, 0.6}) CHECK(c.eval(x) == doctest::Approx(1.0).epsilon(1e-15));
    const CovarianceKernel two = make_kernel_from_coeffs({1.0, 0.25}, 64);
    CHECK(two.at_zero() == doctest::Approx(1.5));
    CHECK(two.eval(0.3) == doctest::Approx(1.0 + 0.5 * std::cos(2 * oracle::kPi * 0.3)).epsilon(1e-14));
    CHECK(make_kernel_from_coeffs({0.5, 0.1, 0.02}, 64).sigma0_sq() == 0.5);
    const CovarianceKernel norm = make_kernel_from_coeffs({0.5, 0.1, 0.02}, 64, true);
    CHECK(norm.sigma0_sq() == 1.0);
    CHECK(norm.coefficient(1) == doctest::Approx(0.2));
  }

  TEST_CASE("invalid kernels are rejected") {
    CHECK_THROWS_AS(make_ou_kernel(0.0, 512), ConfigError);
    CHECK_THROWS_AS(make_ou_kernel(-1.0, 512), ConfigError);
    CHECK_THROWS_AS(make_ou_kernel(1.0, 500), ConfigError);
    CHECK_THROWS_AS(make_ou_kernel(1.0, 8), ConfigError);
    CHECK_THROWS_AS(make_kernel_from_coeffs({1.0, -0.1}, 64), ConfigError);
    try {
      make_kernel_from_coeffs({0.0, 1.0}, 64);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("K1 > 0") != std::string::npos);
    }
  }

  TEST_CASE("K(0) dominates int K") {
    for (double m : {0.5, 1.0, 2.0, 8.0}) {
      const CovarianceKernel k = make_ou_kernel(m, 256);
      CHECK(k.at_zero() >= k.sigma0_sq());
    }
    CHECK(make_ou_kernel(1.0, 512, true).at_zero() >= 1.0);
  }

  TEST_CASE("quadratic forms") {
    const CovarianceKernel k = make_ou_kernel(1.0, 512);
    CHECK(k.quad_form_inv(Grid(512, 0.0)) == 0.0);
    const CovarianceKernel c = make_kernel_from_coeffs({1.0}, 64);
    CHECK(c.quad_form_inv(Grid(64, 1.7)) == doctest::Approx(1.7 * 1.7).epsilon(1e-14));

    // (K - 1)/K(0): I = (K(0) - 1)/K(0)^2, by the spectral identity sum Khat^2/Khat.
    Grid f = k.on_grid();
    for (double& v : f) v = (v - 1.0) / k.at_zero();
    const double expected = (k.at_zero() - 1.0) / (k.at_zero() * k.at_zero());
    CHECK(k.quad_form_inv(f) == doctest::Approx(expected).epsilon(1e-10));
    // Closed-form K(0) gives 0.0700252; the band-limited K(0) is slightly smaller.
    const double K0 = oracle::ou_K0_closed(1.0);
    CHECK((K0 - 1.0) / (K0 * K0) == doctest::Approx(0.0700252).epsilon(1e-5));
    CHECK(std::abs(expected - 0.070014) < 2e-4);
  }

  TEST_CASE("inverse consistency: I(K g) = <g, K g>") {
    const CovarianceKernel k = make_ou_kernel(1.0, 256);
    for (std::uint64_t i = 0; i < 10; ++i) {
      SampleRng rng(3, 0, i);
      const Grid g = sample(k, rng).values;
      const Grid kg = k.apply(g);
      CHECK(k.quad_form_inv(kg) == doctest::Approx(k.quad_form(g)).epsilon(1e-10));
    }
  }

  TEST_CASE("sup norm is controlled by the Cameron-Martin norm") {
    const CovarianceKernel k = make_ou_kernel(1.0, 256);
    int violations = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      SampleRng rng(11, 0, i);
      const Grid f = sample(k, rng).values;
      if (std::pow(spectral::sup_norm(f), 2) > k.at_zero() * k.quad_form_inv(f)) ++violations;
    }
    CHECK(violations == 0);
  }

  TEST_CASE("paths outside the represented modes are refused") {
    const CovarianceKernel two = make_kernel_from_coeffs({1.0, 0.25}, 64);
    CHECK_THROWS_AS(two.quad_form_inv(oracle::cosine_path(64, 1.0, 3)), NumericalError);
    CHECK_NOTHROW(two.quad_form_inv(oracle::cosine_path(64, 1.0, 1)));
    // Roundoff-level energy in an absent mode is tolerated.
    Grid nearly = oracle::cosine_path(64, 1.0, 1);
    const Grid tiny = oracle::cosine_path(64, 1e-12, 3);
    for (std::size_t j = 0; j < nearly.size(); ++j) nearly[j] += tiny[j];
    CHECK_NOTHROW(two.quad_form_inv(nearly));
  }
}
