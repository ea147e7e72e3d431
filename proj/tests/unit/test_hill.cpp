#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hillgse/errors.hpp"
#include "hillgse/hill.hpp"
#include "hillgse/sampler.hpp"
#include "oracles.hpp"

using namespace hillgse;

namespace {

PotentialSample ou_sample(std::uint64_t i, std::size_t n = 512) {
  static const CovarianceKernel k512 = make_ou_kernel(1.0, 512);
  const CovarianceKernel k = n == 512 ? k512 : make_ou_kernel(1.0, n);
  SampleRng rng(2024, 0, i);
  return sample(k, rng);
}

}  // namespace

TEST_SUITE("hill") {
  TEST_CASE("zero and constant potentials") {
    const Grid zero(512, 0.0);
    const GroundState g = ground_state_galerkin(zero);
    CHECK(std::abs(g.lambda0) < 1e-12);
    CHECK(oracle::sup_abs_diff(g.psi, Grid(512, 1.0)) < 1e-12);
    CHECK(std::abs(ground_state_discriminant(zero).lambda0) < 1e-10);
    for (double c : {-3.5, 0.7, 12.0}) {
      const Grid q(512, c);
      CHECK(std::abs(ground_energy_galerkin(q) - c) <= 1e-10);
      CHECK(std::abs(ground_energy(q, EigenMethod::discriminant) - c) <= 1e-10 * (1 + std::abs(c)));
    }
  }

  TEST_CASE("2 cos(2 pi x) against a dense Hermitian eigensolve") {
    const Grid q = oracle::cosine_path(512, 2.0);
    const double dense = oracle::dense_ground_energy(q, 64);
    // Second-order perturbation theory: -2 |qhat(1)|^2 / (2 pi)^2 = -1/(2 pi^2).
    CHECK(std::abs(dense + 1.0 / (2.0 * oracle::kPi * oracle::kPi)) < 1e-3);
    const GroundState g = ground_state_galerkin(q);
    CHECK(std::abs(g.lambda0 - dense) < 1e-10);
    const GroundState d = ground_state_discriminant(q);
    CHECK(std::abs(d.lambda0 - g.lambda0) < 1e-8);
  }

  TEST_CASE("Galerkin matches the dense oracle on OU samples") {
    for (std::uint64_t i = 0; i < 3; ++i) {
      const PotentialSample s = ou_sample(i);
      const double dense = oracle::dense_ground_energy(s.values, 64);
      CHECK(ground_energy_galerkin(s.values) == doctest::Approx(dense).epsilon(1e-11));
    }
  }

  TEST_CASE("monodromy: analytic discriminants and Wronskian") {
    const Grid zero(512, 0.0);
    const MonodromyData m = monodromy(zero, -1.0, 4096);
    CHECK(m.discriminant == doctest::Approx(2.0 * std::cosh(1.0)).epsilon(1e-12));
    CHECK(std::abs(2.0 * std::cosh(1.0) - 3.086161) < 1e-6);
    const double edge = 4.0 * oracle::kPi * oracle::kPi;
    CHECK(std::abs(monodromy(zero, edge, 4096).discriminant - 2.0) < 1e-9);
    for (double lambda : {-20.0, -2.0, 3.0, 30.0}) {
      CHECK(monodromy(zero, lambda, 4096).discriminant ==
            doctest::Approx(oracle::free_discriminant(lambda)).epsilon(1e-9));
      const Grid c(512, 1.3);
      CHECK(monodromy(c, lambda + 1.3, 4096).discriminant ==
            doctest::Approx(oracle::free_discriminant(lambda)).epsilon(1e-9));
    }
    // Large negative lambda needs the internal rescaling.
    const MonodromyData deep = monodromy(zero, -1e4, 4096);
    CHECK(std::isfinite(deep.log_scale));
    // det = 1 is not observable here (cosh^2 - sinh^2 at e^100); the trace is.
    // RK4 global error ~ steps (h sqrt|lambda|)^5 / 5! ~ 3e-7 here
    CHECK(deep.discriminant == doctest::Approx(2.0 * std::cosh(100.0)).epsilon(1e-6));
    for (std::uint64_t i = 0; i < 5; ++i) {
      const PotentialSample s = ou_sample(i);
      CHECK(std::abs(monodromy(s.values, -3.0, 4096).log_determinant()) < 1e-9);
      CHECK(std::abs(monodromy(s.values, -3.0, 4096).transfer().determinant() - 1.0) < 1e-9);
    }
  }

  TEST_CASE("cross-solver agreement on OU samples") {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 25; ++i) {
      const PotentialSample s = ou_sample(100 + i);
      const double a = ground_energy_galerkin(s.values);
      const double b = ground_energy(s.values, EigenMethod::discriminant);
      worst = std::max(worst, std::abs(a - b) / (1.0 + spectral::sup_norm(s.values)));
    }
    CHECK(worst <= 1e-8);
  }

  TEST_CASE("ground state invariants") {
    for (std::uint64_t i = 0; i < 10; ++i) {
      const PotentialSample s = ou_sample(200 + i);
      const double qsup = spectral::sup_norm(s.values);
      for (EigenMethod method : {EigenMethod::galerkin, EigenMethod::discriminant}) {
        const GroundState g = ground_state(s.values, method);
        CHECK(*std::min_element(g.psi.begin(), g.psi.end()) > 0.0);
        double norm = 0.0;
        for (double v : g.psi) norm += v * v;
        CHECK(std::abs(norm / g.psi.size() - 1.0) < 1e-12);
        CHECK(g.lambda0 >= *std::min_element(s.values.begin(), s.values.end()));
        CHECK(g.lambda0 <= spectral::mean(s.values) + 1e-12);
        // The discriminant eigenfunction is only as good as RK4 at 4096 steps.
        const double tol = method == EigenMethod::galerkin ? 1e-10 : 1e-8;
        CHECK(g.residual <= tol * (1.0 + qsup));
      }
    }
  }

  TEST_CASE("monotonicity and shift covariance") {
    const Grid bump = [] {
      Grid g = oracle::cosine_path(512, 1.0);
      for (double& v : g) v += 1.0;  // >= 0
      return g;
    }();
    for (std::uint64_t i = 0; i < 10; ++i) {
      const PotentialSample s = ou_sample(300 + i);
      Grid upper = s.values;
      for (std::size_t j = 0; j < upper.size(); ++j) upper[j] += 0.3 * bump[j];
      CHECK(ground_energy_galerkin(s.values) <= ground_energy_galerkin(upper));
      Grid shifted = s.values;
      for (double& v : shifted) v += 2.5;
      CHECK(std::abs(ground_energy_galerkin(shifted) - ground_energy_galerkin(s.values) - 2.5) < 1e-10);
    }
  }

  TEST_CASE("Rayleigh bound with a localized test function") {
    const CovarianceKernel k = make_ou_kernel(1.0, 512);
    const double lambda = -50.0;
    Grid q = k.on_grid();
    for (double& v : q) v *= lambda / k.at_zero();
    // Periodized Gaussian bump of width 0.05 at x = 0, normalized in L2.
    Grid psi(512);
    for (std::size_t j = 0; j < psi.size(); ++j) {
      const double x = static_cast<double>(j) / 512.0;
      const double d = std::min(x, 1.0 - x);
      psi[j] = std::exp(-d * d / (2.0 * 0.05 * 0.05));
    }
    double norm = 0.0;
    for (double v : psi) norm += v * v / 512.0;
    for (double& v : psi) v /= std::sqrt(norm);
    const Grid dpsi = spectral::derivative(psi);
    double rhs = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) rhs += (dpsi[j] * dpsi[j] + q[j] * psi[j] * psi[j]) / 512.0;
    CHECK(ground_energy_galerkin(q) <= rhs);
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(ground_state_galerkin(Grid(100, 0.0)), ConfigError);
    SolverOptions o;
    o.galerkin_modes = 300;
    CHECK_THROWS_AS(ground_state_galerkin(Grid(512, 0.0), o), ConfigError);
    CHECK_THROWS_AS(HillPropagator(Grid(512, 0.0), 1000), ConfigError);
    CHECK(parse_eigen_method("discriminant") == EigenMethod::discriminant);
    CHECK_THROWS_AS(parse_eigen_method("lanczos"), ConfigError);
  }
}
