#pragma once

#include <span>

#include "hillgse/hill.hpp"
#include "hillgse/spectral.hpp"

namespace hillgse {

/// Log-derivative p = psi'/psi of the positive Floquet solution with
/// multiplier e^s at energy `lambda`, for a mean-zero potential q~.
///
/// `phi` is the shipped value of int p~^2, taken from the identity
/// int p~^2 = -lambda - s^2 (the period average of q~ = lambda + p' + p^2).
/// `phi_logderiv` is the same quantity computed directly from p and serves as
/// the cross-check.
struct RiccatiData {
  Grid p;
  double s = 0.0;
  Grid p_tilde;
  double phi = 0.0;
  double lambda = 0.0;
  double phi_logderiv = 0.0;
  double riccati_residual = 0.0;  // ||P(p' + p^2 + lambda - q~)||_2
};

struct RiccatiOptions {
  SolverOptions solver;
  EigenMethod method = EigenMethod::galerkin;
  double identity_tol = 1e-8;
};

/// s = 0: ground state of -d^2/dx^2 + q~, Phi = -Lambda0(q~).
RiccatiData phi(std::span<const double> q_tilde, const RiccatiOptions& opts = {});

/// Floquet solution with multiplier e^s, found as the root lambda < Lambda0(q~)
/// of Delta(lambda) = 2 cosh s. At s = 0 this is phi().
RiccatiData floquet_solve(std::span<const double> q_tilde, double s, const RiccatiOptions& opts = {});

/// Same as floquet_solve with a prebuilt propagator and an optional guess for
/// lambda (NaN for none); used by the quadrature loops.
RiccatiData floquet_solve(const HillPropagator& prop, std::span<const double> q_tilde, double s,
                          const RiccatiOptions& opts, double lambda_guess);

/// J(s, q~) = d q0 / d s at fixed (lambda, q~), where q0 = lambda + Phi_s + s^2.
/// With W(x) = int_0^x (p~ + s):
///   1/J = (e^{2s} - 1)^{-1} int int e^{2W(y) - 2W(x)} dx dy
///         + int_0^1 int_0^x e^{2W(y) - 2W(x)} dy dx,
/// evaluated by trapezoid quadrature on a refined grid.
double jacobian_J(const RiccatiData& data);
double jacobian_J(std::span<const double> q_tilde, double s, const RiccatiOptions& opts = {});

/// The same quantity from the Fourier series
///   1/J = sum_k ghat(k) hhat(-k) / (2s + 2 pi i k),  g = e^{2P}, h = e^{-2P},
/// with P the periodic antiderivative of p~.
double jacobian_J_resolvent(const RiccatiData& data);

struct Lemma21Report {
  double lambda = 0.0;
  double step = 0.0;
  double phi_s = 0.0;
  double q0 = 0.0;
  double slope = 0.0;
  bool passed = false;
};

/// q0(lambda) = lambda + Phi_s(q~) + s^2 at fixed (q~, s): reports the
/// difference-quotient slope in lambda, which must be 1.
Lemma21Report check_lemma21(std::span<const double> q_tilde, double s, double lambda, double h,
                            const RiccatiOptions& opts = {});

/// Substitutes p~ back into q~ = p~' + p~^2 - int p~^2 + 2 s p~.
Grid reconstruct_potential(const RiccatiData& data);

}  // namespace hillgse
