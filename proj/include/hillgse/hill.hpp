#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "hillgse/spectral.hpp"

namespace hillgse {

enum class EigenMethod { galerkin, discriminant };

std::string to_string(EigenMethod m);
EigenMethod parse_eigen_method(const std::string& name);

struct SolverOptions {
  std::size_t galerkin_modes = 64;
  std::size_t ode_steps = 4096;
  double tolerance = 1e-10;
  int max_iterations = 500;
};

/// Ground state of Q = -d^2/dx^2 + q with periodic boundary conditions.
///
/// `psi` is positive on the grid with mean(psi^2) = 1. `residual` is the L2
/// norm of -psi'' + q psi - lambda0 psi restricted to the modes the solver
/// resolves: |k| <= galerkin_modes for the Galerkin solver, |k| <= N/4 for the
/// discriminant solver.
struct GroundState {
  double lambda0 = 0.0;
  Grid psi;
  EigenMethod method = EigenMethod::galerkin;
  double residual = 0.0;
  int iterations = 0;
};

/// Period map of (psi, psi') for psi'' = (q - lambda) psi. Stored as
/// exp(log_scale) * scaled so that very negative lambda does not overflow.
struct MonodromyData {
  Eigen::Matrix2d scaled = Eigen::Matrix2d::Identity();
  double log_scale = 0.0;
  double discriminant = 2.0;

  Eigen::Matrix2d transfer() const { return std::exp(log_scale) * scaled; }
  /// log det of the transfer matrix; zero up to integration error.
  double log_determinant() const;
};

/// Solution of psi'' = (q - lambda) psi with psi(x+1) = e^s psi(x), sampled
/// at the integrator nodes x_j = j/steps.
struct FloquetSolution {
  double lambda = 0.0;
  double log_multiplier = 0.0;
  Grid p;        // psi'/psi
  Grid log_psi;  // log psi - log psi(0)
  double log_psi_period = 0.0;  // log psi(1) - log psi(0)
  bool positive = true;
};

/// RK4 integrator for Hill's equation over one period. The potential is
/// trigonometrically interpolated to quarter-step nodes once at construction
/// (the Floquet trajectory is integrated with half steps). All member
/// functions are const and safe to share.
class HillPropagator {
 public:
  HillPropagator(std::span<const double> q, std::size_t ode_steps);

  std::size_t steps() const noexcept { return steps_; }
  double min_potential() const noexcept { return q_min_; }
  double max_potential() const noexcept { return q_max_; }
  double mean_potential() const noexcept { return q_mean_; }

  MonodromyData monodromy(double lambda) const;

  /// Floquet solution with multiplier e^s at energy lambda (lambda must lie
  /// below the ground state, or at it for s = 0). Positive by construction
  /// when lambda is admissible; `positive` reports the check.
  FloquetSolution floquet(double lambda, double s) const;

 private:
  MonodromyData propagate(double lambda, int substeps) const;

  std::size_t steps_;
  Grid fine_;  // q at x = j/(4 steps)
  double q_min_ = 0.0;
  double q_max_ = 0.0;
  double q_mean_ = 0.0;
};

/// Smallest eigenvalue of the Galerkin matrix H_kl = (2 pi k)^2 delta_kl +
/// qhat(k-l), |k|,|l| <= modes, by shifted inverse iteration.
GroundState ground_state_galerkin(std::span<const double> q, const SolverOptions& opts = {});

/// Eigenvalue only, skipping the eigenfunction reconstruction.
double ground_energy_galerkin(std::span<const double> q, const SolverOptions& opts = {});

MonodromyData monodromy(std::span<const double> q, double lambda, std::size_t ode_steps);

/// Smallest root of Delta(lambda) = 2, bracketed in [min q - 1, mean q + 1].
GroundState ground_state_discriminant(std::span<const double> q, const SolverOptions& opts = {});

GroundState ground_state(std::span<const double> q, EigenMethod method, const SolverOptions& opts = {});
double ground_energy(std::span<const double> q, EigenMethod method, const SolverOptions& opts = {});

/// ||P_band(-psi'' + q psi - lambda psi)||_2 by spectral differentiation.
double eigen_residual(std::span<const double> q, std::span<const double> psi, double lambda, std::size_t band);

}  // namespace hillgse
