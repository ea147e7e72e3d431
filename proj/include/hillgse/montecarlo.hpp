#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hillgse/hill.hpp"
#include "hillgse/kernel.hpp"
#include "hillgse/sampler.hpp"

namespace hillgse {

struct McOptions {
  std::size_t n_samples = 10000;
  std::uint64_t seed = 42;
  std::uint64_t stream = 0;
  unsigned threads = 1;  // 0: one per hardware thread
  SolverOptions solver;
  EigenMethod method = EigenMethod::galerkin;
  double max_failure_fraction = 1e-3;
};

/// Per-sample Phi(q~) and log likelihood ratio, in sample-index order.
/// Samples whose eigensolve failed are dropped; `failed` counts them.
struct PhiSamples {
  Grid phi;
  Grid log_weight;
  std::size_t failed = 0;
  std::size_t requested = 0;
};

PhiSamples draw_phi(const CovarianceKernel& kernel, const McOptions& opts, const TiltSpec* tilt = nullptr);

struct DensityEstimate {
  Grid lambdas;
  Grid f_hat;
  Grid std_err;
  Grid n_eff;       // Kish effective sample size of the per-sample terms
  Grid tilt_theta;  // 0 where no tilt was used
  std::size_t n_samples = 0;
  std::size_t n_failed = 0;
  std::uint64_t seed = 0;
};

/// f(lambda) = E[w exp(-(lambda + Phi)^2 / (2 v))] / sqrt(2 pi v) with
/// v = Khat(0) + extra_variance. A positive extra_variance gives the density
/// of Lambda0 + N(0, extra_variance), i.e. f smoothed by a Gaussian.
DensityEstimate density_from_phi(const PhiSamples& samples, std::span<const double> lambdas, double variance);

/// f'(lambda) = -E[w (lambda + Phi) exp(-(lambda + Phi)^2 / (2 v))] / (v sqrt(2 pi v)).
DensityEstimate density_derivative_from_phi(const PhiSamples& samples, std::span<const double> lambdas,
                                            double variance);

DensityEstimate estimate_density(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                 const McOptions& opts, const TiltSpec* tilt = nullptr,
                                 double extra_variance = 0.0);

DensityEstimate estimate_density_derivative(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                            const McOptions& opts, const TiltSpec* tilt = nullptr);

/// Which energies get a Cameron-Martin tilt toward theta * lambda (K - Khat(0)) / K(0).
struct TiltPolicy {
  enum class Kind { none, automatic, fixed };
  Kind kind = Kind::none;
  double theta = 1.0;
  double threshold = -3.0;  // automatic: tilt for lambda <= threshold

  double theta_for(double lambda) const;
  static TiltPolicy parse(const std::string& text);
  std::string to_string() const;
};

/// Untilted energies share one sample set (stream opts.stream); each tilted
/// energy lambdas[i] gets its own set on stream opts.stream + 1 + i.
DensityEstimate estimate_density(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                 const McOptions& opts, const TiltPolicy& policy);

/// Lambda0(q) for plain samples of the full potential, failures dropped.
struct Lambda0Samples {
  Grid values;
  std::size_t failed = 0;
  std::size_t requested = 0;
};

Lambda0Samples draw_lambda0(const CovarianceKernel& kernel, const McOptions& opts);

/// Gaussian kernel density estimate of sampled Lambda0 values.
DensityEstimate kde_from_samples(const Lambda0Samples& samples, std::span<const double> lambdas, double bandwidth);

DensityEstimate estimate_density_direct(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                        const McOptions& opts, double bandwidth);

struct DistributionEstimate {
  Grid lambdas;
  Grid p_hat;  // P(Lambda0 > lambda)
  Grid std_err;
  std::size_t n_samples = 0;
  std::size_t n_failed = 0;
  std::uint64_t seed = 0;
};

/// Empirical P(Lambda0 > lambda).
DistributionEstimate estimate_distribution_direct(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                                  const McOptions& opts);

struct SQuadrature {
  double s_max = 0.0;  // 0: automatic
  double tolerance = 1e-8;
  int max_subdivisions = 200;
  int initial_intervals = 4;
};

/// Upper limit used when SQuadrature::s_max is 0: at least 4 max(1, sqrt|lambda|)
/// and far enough that lambda + s^2 clears the Gaussian factor.
double automatic_s_max(std::span<const double> lambdas, double variance);

/// P(Lambda0 > lambda) = E int_0^inf exp(-(lambda + Phi_s + s^2)^2 / (2 v)) J(s, q~) ds / sqrt(2 pi v),
/// with the inner integral done by adaptive Gauss-Kronrod over s, shared by
/// all requested energies.
DistributionEstimate estimate_distribution_thm23(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                                 const McOptions& opts, const SQuadrature& quad = {});

/// Inner s-integral for one mean-zero path, one value per energy.
Grid thm23_inner(std::span<const double> q_tilde, std::span<const double> lambdas, double variance,
                 const SolverOptions& solver, const SQuadrature& quad);

enum class TailSide { left, right };
TailSide parse_tail_side(const std::string& text);
std::string to_string(TailSide side);

struct TailFit {
  TailSide side = TailSide::right;
  double rate_hat = 0.0;
  double intercept = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::size_t points = 0;
  double target = 0.0;
  double rel_err = 0.0;
};

/// Limiting rate of -log f(lambda) / lambda^2: 1/(2 int K) on the right,
/// 1/(2 K(0)) on the left.
double tail_rate_target(const CovarianceKernel& kernel, TailSide side);

/// Least squares fit of log f_hat(lambda) = c - r lambda^2 over the window.
TailFit fit_tail_rate(const DensityEstimate& est, TailSide side, double window_lo, double window_hi,
                      double target);

}  // namespace hillgse
