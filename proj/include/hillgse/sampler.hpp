#pragma once

#include <span>

#include "hillgse/kernel.hpp"
#include "hillgse/rng.hpp"
#include "hillgse/spectral.hpp"

namespace hillgse {

/// A potential path q on the kernel's grid, split as q = q0 + q~ with q0 the
/// mean and q~ the mean-zero part. `log_weight` is the log likelihood ratio
/// of the untilted law against the law the path was drawn from (0 for plain
/// draws).
struct PotentialSample {
  Grid values;
  double q0 = 0.0;
  Grid tilde_values;
  double log_weight = 0.0;
};

/// Wraps an arbitrary grid path (e.g. read from a file).
PotentialSample make_potential(Grid values);

/// Cameron-Martin mean shift h applied to q~, with rate = I(h)/2.
struct TiltSpec {
  Grid shift_path;
  Spectrum shift_spectrum;
  double rate = 0.0;
};

/// Spectral synthesis: mode 0 real N(0, Khat(0)), modes n >= 1 complex
/// Gaussian with E|c_n|^2 = Khat(n), Hermitian symmetric.
PotentialSample sample(const CovarianceKernel& kernel, SampleRng& rng);

/// Tilt from an arbitrary mean-zero shift; rejects shifts outside the
/// kernel's represented modes.
TiltSpec make_tilt(const CovarianceKernel& kernel, Grid shift);

/// Shift toward theta * lambda (K(x) - Khat(0)) / K(0), the mean-zero part of
/// the concentration point lambda K(x)/K(0).
TiltSpec make_tilt_toward_optimal(const CovarianceKernel& kernel, double lambda, double theta = 1.0);

/// Draws q~ + h with q~ untilted; log_weight = -<h, K^{-1} q~> - I(h)/2 so
/// that E_tilted[exp(log_weight) F] = E[F]. q0 is drawn untilted.
PotentialSample sample_tilted(const CovarianceKernel& kernel, const TiltSpec& tilt, SampleRng& rng);

}  // namespace hillgse
