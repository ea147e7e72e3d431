#include <doctest.h>

#include <cmath>
#include <vector>

#include "hillgse/errors.hpp"
#include "hillgse/variational.hpp"
#include "oracles.hpp"

using namespace hillgse;

namespace {

// sup_y |K(y + h) - K(y)| on the grid, for grid shifts h = d/N.
std::vector<double> shift_modulus(const CovarianceKernel& k) {
  const Grid kg = k.on_grid();
  const std::size_t n = kg.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t d = 0; d < n; ++d) {
    for (std::size_t y = 0; y < n; ++y) out[d] = std::max(out[d], std::abs(kg[(y + d) % n] - kg[y]));
  }
  return out;
}

void check_invariants(const CovarianceKernel& k, const VariationalResult& r) {
  const double lam = std::abs(r.lambda);
  CHECK(r.residuals.eigenvalue <= 1e-6 * lam);
  CHECK(r.residuals.consistency <= 1e-6 * lam);
  CHECK(r.residuals.el <= 1e-6 * std::pow(lam, 1.5));
  CHECK(*std::max_element(r.q_opt.begin(), r.q_opt.end()) < 0.0);
  CHECK(*std::max_element(r.a_opt.begin(), r.a_opt.end()) < 0.0);
  CHECK(r.J_value == doctest::Approx(J_of(k, r.q_opt)).epsilon(1e-14));
  CHECK(r.J_value / (lam * lam) <= 0.5 / k.sigma0_sq() * (1.0 + 1e-9));
  CHECK(r.J_value / (lam * lam) >= 0.5 / k.at_zero() - 1e-9);
  CHECK(std::abs(spectral::mean(r.p_opt)) < 1e-9);
}

}  // namespace

TEST_SUITE("variational") {
  TEST_CASE("constant kernel: the constant potential in one step") {
    const CovarianceKernel k = make_kernel_from_coeffs({1.0}, 128);
    for (double lambda : {-1.0, -7.5, -40.0}) {
      const VariationalResult r = solve_euler_lagrange(k, lambda);
      CHECK(oracle::sup_abs_diff(r.q_opt, Grid(128, lambda)) < 1e-10 * std::abs(lambda));
      CHECK(r.J_value == doctest::Approx(0.5 * lambda * lambda).epsilon(1e-10));
      CHECK(r.iterations == 1);
    }
  }

  TEST_CASE("J of simple potentials") {
    const CovarianceKernel k = make_ou_kernel(1.0, 512);
    CHECK(J_of(k, Grid(512, 0.0)) == 0.0);
    const CovarianceKernel unit = make_ou_kernel(1.0, 512, true);
    CHECK(J_of(unit, Grid(512, -3.0)) == doctest::Approx(4.5).epsilon(1e-13));
    // lambda K / K(0) has J = lambda^2 / (2 K(0))
    const double lambda = -4.0;
    Grid q = k.on_grid();
    for (double& v : q) v *= lambda / k.at_zero();
    CHECK(J_of(k, q) == doctest::Approx(lambda * lambda / (2.0 * k.at_zero())).epsilon(1e-11));
    Grid rough(512, 0.0);
    rough[3] = 1.0;
    CHECK_THROWS_AS(J_of(k, rough), NumericalError);
  }

  TEST_CASE("rescaling hits the target eigenvalue") {
    const CovarianceKernel k = make_ou_kernel(1.0, 256);
    Grid q = k.on_grid();
    for (double& v : q) v = -v;
    const double beta = scale_to_eigenvalue(q, -3.0, SolverOptions{});
    Grid scaled = q;
    for (double& v : scaled) v *= beta;
    CHECK(ground_energy_galerkin(scaled) == doctest::Approx(-3.0).epsilon(1e-10));
    CHECK_THROWS_AS(scale_to_eigenvalue(Grid(256, 1.0), -3.0, SolverOptions{}), NumericalError);
  }

  TEST_CASE("OU minimizers are feasible, negative and stationary") {
    const CovarianceKernel k = make_ou_kernel(1.0, 256);
    for (double lambda : {-2.0, -10.0}) check_invariants(k, solve_euler_lagrange(k, lambda));
  }

  TEST_CASE("two-mode kernel at large |lambda| moves toward 1/(2 K(0))") {
    const CovarianceKernel k = make_kernel_from_coeffs({1.0, 0.25}, 256);
    CHECK(k.at_zero() == doctest::Approx(1.5).epsilon(1e-15));
    const VariationalResult r = solve_euler_lagrange(k, -1000.0);
    check_invariants(k, r);
    const double ratio = r.J_value / 1e6;
    CHECK(ratio < 0.5 - 1e-3);
    CHECK(ratio > 1.0 / 3.0);
    // modulus of continuity: |q(x) - q(x')| <= sup_y |K(y+h) - K(y)| * ||q||_inf / Khat(0)
    const std::vector<double> mod = shift_modulus(k);
    const double qsup = spectral::sup_norm(r.q_opt);
    const std::size_t n = r.q_opt.size();
    double worst = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      for (std::size_t x = 0; x < n; ++x) {
        worst = std::max(worst, std::abs(r.q_opt[(x + d) % n] - r.q_opt[x]) - mod[d] * qsup / k.sigma0_sq());
      }
    }
    CHECK(worst <= 1e-9 * qsup);
  }

  TEST_CASE("rate curve of the constant kernel is flat") {
    const CovarianceKernel k = make_kernel_from_coeffs({1.0}, 128);
    const std::vector<double> lambdas{-1.0, -5.0, -25.0};
    const std::vector<RateRow> rows = rate_curve(k, lambdas, {}, 2);
    REQUIRE(rows.size() == 3);
    for (const RateRow& r : rows) {
      CHECK(r.J_over_lambda2 == doctest::Approx(0.5).epsilon(1e-10));
      CHECK(r.target == doctest::Approx(0.5).epsilon(1e-14));
    }
  }

  TEST_CASE("multistart never does worse than the default start") {
    const CovarianceKernel k = make_kernel_from_coeffs({1.0, 0.25}, 128);
    const MultistartResult m = multistart(k, -200.0, 3, 9);
    REQUIRE(m.J_values.size() == 4);
    CHECK(m.best.J_value <= m.J_values.front());
    CHECK(m.best.J_value == m.J_values[m.best_index]);
  }

  TEST_CASE("input validation") {
    const CovarianceKernel k = make_ou_kernel(1.0, 64);
    CHECK_THROWS_AS(solve_euler_lagrange(k, 1.0), ConfigError);
    CHECK_THROWS_AS(solve_euler_lagrange(k, -1.0, {}, Grid(64, 0.5)), NumericalError);
  }
}
