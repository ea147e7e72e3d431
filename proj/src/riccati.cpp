#include "hillgse/riccati.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hillgse/errors.hpp"

namespace hillgse {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Quadrature grid for the Jacobian double integrals.
constexpr std::size_t kJacobianGrid = 4096;

void require_mean_zero(std::span<const double> q_tilde) {
  const double m = spectral::mean(q_tilde);
  if (std::abs(m) > 1e-10 * (1.0 + spectral::sup_norm(q_tilde))) {
    std::ostringstream msg;
    msg << "riccati: potential must be mean-zero (mean " << m << ")";
    throw ConfigError(msg.str());
  }
}

double mean_square(std::span<const double> f) {
  double acc = 0.0;
  for (double v : f) acc += v * v;
  return acc / static_cast<double>(f.size());
}

double riccati_residual(std::span<const double> p, std::span<const double> q_tilde, double lambda,
                        std::size_t band) {
  const Grid q = p.size() == q_tilde.size() ? Grid(q_tilde.begin(), q_tilde.end())
                                            : spectral::resample(q_tilde, p.size());
  const Grid dp = spectral::derivative(p);
  Grid r(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) r[j] = dp[j] + p[j] * p[j] + lambda - q[j];
  return spectral::band_norm(r, band);
}

void fill_tilde(RiccatiData& d) {
  d.p_tilde.resize(d.p.size());
  for (std::size_t j = 0; j < d.p.size(); ++j) d.p_tilde[j] = d.p[j] - d.s;
}

}  // namespace

RiccatiData phi(std::span<const double> q_tilde, const RiccatiOptions& opts) {
  require_mean_zero(q_tilde);
  const GroundState gs = ground_state(q_tilde, opts.method, opts.solver);
  const Grid dpsi = spectral::derivative(gs.psi);
  RiccatiData d;
  d.p.resize(gs.psi.size());
  for (std::size_t j = 0; j < d.p.size(); ++j) d.p[j] = dpsi[j] / gs.psi[j];
  const double s = spectral::mean(d.p);
  if (std::abs(s) > 1e-9) {
    std::ostringstream msg;
    msg << "log-derivative of the periodic ground state has mean " << s;
    throw NumericalError("riccati", msg.str());
  }
  d.s = 0.0;
  fill_tilde(d);
  d.lambda = gs.lambda0;
  d.phi = -gs.lambda0;
  d.phi_logderiv = mean_square(d.p);
  const std::size_t band =
      opts.method == EigenMethod::galerkin ? opts.solver.galerkin_modes : q_tilde.size() / 4;
  d.riccati_residual = riccati_residual(d.p, q_tilde, d.lambda, band);
  if (std::abs(d.phi - d.phi_logderiv) > opts.identity_tol) {
    std::ostringstream msg;
    msg << "identity Phi = -Lambda0 violated: " << d.phi_logderiv << " vs " << d.phi;
    throw NumericalError("riccati", msg.str());
  }
  return d;
}

RiccatiData floquet_solve(std::span<const double> q_tilde, double s, const RiccatiOptions& opts) {
  if (s == 0.0) return phi(q_tilde, opts);
  require_mean_zero(q_tilde);
  const HillPropagator prop(q_tilde, opts.solver.ode_steps);
  return floquet_solve(prop, q_tilde, s, opts, std::nan(""));
}

RiccatiData floquet_solve(const HillPropagator& prop, std::span<const double> q_tilde, double s,
                          const RiccatiOptions& opts, double lambda_guess) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("riccati: s must be finite and >= 0");
  if (s == 0.0) return phi(q_tilde, opts);

  // Delta(lambda) - 2 cosh s, scaled by e^{-s} to keep it O(1) for large s.
  const double target = 2.0 * std::cosh(s);
  auto f = [&](double lambda) { return (prop.monodromy(lambda).discriminant - target) / target; };

  // Comparison with constant potentials: Delta >= 2 cosh sqrt(min q - lambda) and
  // Delta <= 2 cosh sqrt(max q - lambda) below the ground state.
  double lo = prop.min_potential() - s * s - 1.0;
  double hi = std::min(prop.max_potential() - s * s, prop.mean_potential());
  double flo = std::nan(""), fhi = std::nan("");
  if (std::isfinite(lambda_guess) && lambda_guess > lo && lambda_guess < hi) {
    // Narrow the bracket around the guess.
    const double width = 1e-3 * (1.0 + std::abs(lambda_guess));
    const double a = std::max(lo, lambda_guess - width);
    const double b = std::min(hi, lambda_guess + width);
    const double fa = f(a);
    if (fa <= 0.0) {
      hi = a;
      fhi = fa;
    } else {
      lo = a;
      flo = fa;
      const double fb = f(b);
      if (fb <= 0.0) {
        hi = b;
        fhi = fb;
      } else {
        lo = b;
        flo = fb;
      }
    }
  }
  if (std::isnan(flo)) flo = f(lo);
  if (std::isnan(fhi)) fhi = f(hi);
  // A constant potential puts the root exactly on the upper comparison bound.
  if (fhi > 0.0 && fhi < 1e-13) fhi = 0.0;
  if (!(flo > 0.0) || !(fhi <= 0.0)) {
    std::ostringstream msg;
    msg << "Floquet bracket failure at s = " << s << " on [" << lo << ", " << hi << "]";
    throw NumericalError("riccati", msg.str());
  }
  double lambda = hi;
  if (fhi != 0.0) {
    boost::uintmax_t iters = static_cast<boost::uintmax_t>(opts.solver.max_iterations);
    auto stop = [](double a, double b) { return std::abs(b - a) <= 1e-14 * (1.0 + std::abs(a)); };
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, iters);
    lambda = 0.5 * (a + b);
  }

  const FloquetSolution sol = prop.floquet(lambda, s);
  if (!sol.positive) {
    std::ostringstream msg;
    msg << "Floquet solution at s = " << s << " is not positive";
    throw NumericalError("riccati", msg.str());
  }
  RiccatiData d;
  d.p = sol.p;
  d.s = s;
  const double int_p = spectral::mean(d.p);
  if (std::abs(int_p - s) > 1e-8 * (1.0 + s)) {
    std::ostringstream msg;
    msg << "int p = " << int_p << " differs from s = " << s;
    throw NumericalError("riccati", msg.str());
  }
  fill_tilde(d);
  d.lambda = lambda;
  d.phi = -lambda - s * s;
  d.phi_logderiv = mean_square(d.p_tilde);
  d.riccati_residual = riccati_residual(d.p, q_tilde, lambda, q_tilde.size() / 4);
  return d;
}

double jacobian_J(const RiccatiData& data) {
  const double s = data.s;
  if (!(s > 0.0)) throw ConfigError("riccati: the Jacobian needs s > 0");
  const std::size_t n = std::max(kJacobianGrid, data.p_tilde.size());
  const Grid pt = data.p_tilde.size() == n ? data.p_tilde : spectral::resample(data.p_tilde, n);
  const Grid big_p = spectral::antiderivative(pt);
  const double h = 1.0 / static_cast<double>(n);

  // g = e^{2W}, k = e^{-2W} at x_j = j h, j = 0..n (the endpoint closes the period).
  Grid g(n + 1), k(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const double w = big_p[j % n] + s * static_cast<double>(j) * h;
    g[j] = std::exp(2.0 * w);
    k[j] = std::exp(-2.0 * w);
  }
  // Pull the scale of g out so that e^{2s} stays finite in the ratio below.
  const double scale = g[n];
  double int_g = 0.0, int_k = 0.0, inner = 0.0, cum_g = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    const double wt = (j == 0 || j == n) ? 0.5 : 1.0;
    if (j > 0) cum_g += 0.5 * h * (g[j - 1] + g[j]);
    int_g += wt * h * g[j];
    int_k += wt * h * k[j];
    inner += wt * h * k[j] * cum_g;
  }
  // (e^{2s} - 1)^{-1} int g int k, written with g scaled by e^{-2s}.
  const double outer = (int_g / scale) * int_k / (1.0 - 1.0 / scale);
  const double inv = outer + inner;
  if (!(inv > 0.0) || !std::isfinite(inv)) {
    throw NumericalError("riccati", "Jacobian J(s, q~) is not positive");
  }
  return 1.0 / inv;
}

double jacobian_J(std::span<const double> q_tilde, double s, const RiccatiOptions& opts) {
  return jacobian_J(floquet_solve(q_tilde, s, opts));
}

double jacobian_J_resolvent(const RiccatiData& data) {
  const double s = data.s;
  if (!(s > 0.0)) throw ConfigError("riccati: the Jacobian needs s > 0");
  const Grid big_p = spectral::antiderivative(data.p_tilde);
  Grid g(big_p.size()), h(big_p.size());
  for (std::size_t j = 0; j < big_p.size(); ++j) {
    g[j] = std::exp(2.0 * big_p[j]);
    h[j] = std::exp(-2.0 * big_p[j]);
  }
  const Spectrum gh = spectral::forward(g);
  const Spectrum hh = spectral::forward(h);
  // k and -k pair up into 2 Re(ghat(k) conj(hhat(k)) / (2s + 2 pi i k)).
  double inv = (gh[0] * hh[0]).real() / (2.0 * s);
  for (std::size_t k = 1; k + 1 < gh.size(); ++k) {
    const Complex denom(2.0 * s, kTwoPi * static_cast<double>(k));
    inv += 2.0 * (gh[k] * std::conj(hh[k]) / denom).real();
  }
  if (!(inv > 0.0)) throw NumericalError("riccati", "Jacobian J(s, q~) is not positive");
  return 1.0 / inv;
}

Lemma21Report check_lemma21(std::span<const double> q_tilde, double s, double lambda, double h,
                            const RiccatiOptions& opts) {
  if (!(h > 0.0)) throw ConfigError("riccati: step must be positive");
  const RiccatiData d = floquet_solve(q_tilde, s, opts);
  auto q0 = [&](double l) { return l + d.phi + s * s; };
  Lemma21Report r;
  r.lambda = lambda;
  r.step = h;
  r.phi_s = d.phi;
  r.q0 = q0(lambda);
  r.slope = (q0(lambda + h) - q0(lambda)) / h;
  r.passed = std::abs(r.slope - 1.0) <= 1e-12;
  return r;
}

Grid reconstruct_potential(const RiccatiData& data) {
  const Grid dp = spectral::derivative(data.p_tilde);
  Grid q(data.p_tilde.size());
  const double phi = mean_square(data.p_tilde);
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double pt = data.p_tilde[j];
    q[j] = dp[j] + pt * pt - phi + 2.0 * data.s * pt;
  }
  return q;
}

}  // namespace hillgse
