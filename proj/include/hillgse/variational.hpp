#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hillgse/hill.hpp"
#include "hillgse/kernel.hpp"

namespace hillgse {

struct VariationalOptions {
  double tolerance = 1e-9;  // on ||q_{k+1} - q_k||_inf / |lambda|
  int max_iterations = 2000;
  SolverOptions solver;
};

struct VariationalResiduals {
  double eigenvalue = 0.0;   // |Lambda0(q_opt) - lambda|
  double el = 0.0;           // ||a' - 2 p a||_2
  double consistency = 0.0;  // ||q_opt - K a||_inf
};

/// Minimizer of J(q) = <q, K^{-1} q>/2 subject to Lambda0(q) = lambda, as
/// found by the Euler-Lagrange fixed point from a given start.
struct VariationalResult {
  double lambda = 0.0;
  Grid q_opt;
  Grid a_opt;
  Grid p_opt;
  double J_value = 0.0;
  VariationalResiduals residuals;
  int iterations = 0;
};

/// Fixed-point iteration: rescale q so that Lambda0(beta q) = lambda, take the
/// ground state psi of beta q, set a = -c psi^2 with int a = int(beta q)/Khat(0),
/// and update q <- K a (damped by 1/2 when the step grows). Starts from
/// lambda K(x)/K(0) unless `start` is given; the start must be negative.
VariationalResult solve_euler_lagrange(const CovarianceKernel& kernel, double lambda,
                                       const VariationalOptions& opts = {}, std::span<const double> start = {});

/// J(q) = <q, K^{-1} q> / 2.
double J_of(const CovarianceKernel& kernel, std::span<const double> q);

/// The unique beta > 0 with Lambda0(beta q) = lambda, for q < 0 and lambda < 0.
double scale_to_eigenvalue(std::span<const double> q, double lambda, const SolverOptions& solver);

struct RateRow {
  double lambda = 0.0;
  double J_over_lambda2 = 0.0;
  double target = 0.0;  // 1/(2 K(0))
  double eig_residual = 0.0;
  int iterations = 0;
};

std::vector<RateRow> rate_curve(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                const VariationalOptions& opts = {}, unsigned threads = 1);

/// Reruns the fixed point from `starts` random negative potentials
/// lambda (1 + 0.3 g/||g||_inf), g a kernel sample, and returns the run with
/// the smallest J (the default start included).
struct MultistartResult {
  VariationalResult best;
  std::vector<double> J_values;  // default start first
  std::size_t best_index = 0;
};

MultistartResult multistart(const CovarianceKernel& kernel, double lambda, std::size_t starts, std::uint64_t seed,
                            const VariationalOptions& opts = {});

}  // namespace hillgse
