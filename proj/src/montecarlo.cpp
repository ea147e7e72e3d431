#include "hillgse/montecarlo.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hillgse/errors.hpp"
#include "hillgse/riccati.hpp"
#include "parallel.hpp"

namespace hillgse {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Neumaier compensated summation; terms are always added in sample-index order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanStats {
  double mean = 0.0;
  double std_err = 0.0;
  double n_eff = 0.0;
};

// Two-pass mean and standard error of the mean.
template <class Term>
MeanStats mean_stats(std::size_t n, Term term) {
  MeanStats out;
  if (n == 0) return out;
  CompensatedSum sum, sq;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = term(i);
    sum.add(x);
    sq.add(x * x);
  }
  out.mean = sum.value() / static_cast<double>(n);
  const double sum_sq = sq.value();
  out.n_eff = sum_sq > 0.0 ? sum.value() * sum.value() / sum_sq : 0.0;
  if (n > 1) {
    CompensatedSum dev;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = term(i) - out.mean;
      dev.add(d * d);
    }
    out.std_err = std::sqrt(dev.value() / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return out;
}

void check_failures(std::size_t failed, std::size_t requested, double max_fraction, const char* what) {
  if (requested == 0) throw ConfigError("montecarlo: n_samples must be >= 1");
  if (static_cast<double>(failed) > max_fraction * static_cast<double>(requested)) {
    std::ostringstream msg;
    msg << failed << " of " << requested << " " << what << " failed (limit " << max_fraction * 100.0 << "%)";
    throw NumericalError("montecarlo", msg.str());
  }
}

// Keeps the entries whose first column is finite, preserving index order.
std::size_t compact(Grid& a, Grid* b) {
  std::size_t kept = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i])) continue;
    a[kept] = a[i];
    if (b) (*b)[kept] = (*b)[i];
    ++kept;
  }
  const std::size_t failed = a.size() - kept;
  a.resize(kept);
  if (b) b->resize(kept);
  return failed;
}

double normal_pdf(double x, double variance) {
  return std::exp(-0.5 * x * x / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

DensityEstimate empty_estimate(std::span<const double> lambdas) {
  DensityEstimate est;
  est.lambdas.assign(lambdas.begin(), lambdas.end());
  est.f_hat.assign(lambdas.size(), 0.0);
  est.std_err.assign(lambdas.size(), 0.0);
  est.n_eff.assign(lambdas.size(), 0.0);
  est.tilt_theta.assign(lambdas.size(), 0.0);
  return est;
}

}  // namespace

PhiSamples draw_phi(const CovarianceKernel& kernel, const McOptions& opts, const TiltSpec* tilt) {
  PhiSamples out;
  out.requested = opts.n_samples;
  out.phi.assign(opts.n_samples, kNaN);
  out.log_weight.assign(opts.n_samples, 0.0);
  detail::parallel_for(opts.n_samples, opts.threads, [&](std::size_t i) {
    SampleRng rng(opts.seed, opts.stream, i);
    const PotentialSample q = tilt ? sample_tilted(kernel, *tilt, rng) : sample(kernel, rng);
    try {
      out.phi[i] = -ground_energy(q.tilde_values, opts.method, opts.solver);
      out.log_weight[i] = q.log_weight;
    } catch (const NumericalError&) {
      out.phi[i] = kNaN;
    }
  });
  out.failed = compact(out.phi, &out.log_weight);
  check_failures(out.failed, out.requested, opts.max_failure_fraction, "eigensolves");
  return out;
}

DensityEstimate density_from_phi(const PhiSamples& samples, std::span<const double> lambdas, double variance) {
  DensityEstimate est = empty_estimate(lambdas);
  const std::size_t n = samples.phi.size();
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const double lambda = lambdas[l];
    const MeanStats st = mean_stats(n, [&](std::size_t i) {
      return std::exp(samples.log_weight[i]) * normal_pdf(lambda + samples.phi[i], variance);
    });
    est.f_hat[l] = st.mean;
    est.std_err[l] = st.std_err;
    est.n_eff[l] = st.n_eff;
  }
  est.n_samples = n;
  est.n_failed = samples.failed;
  return est;
}

DensityEstimate density_derivative_from_phi(const PhiSamples& samples, std::span<const double> lambdas,
                                            double variance) {
  DensityEstimate est = empty_estimate(lambdas);
  const std::size_t n = samples.phi.size();
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const double lambda = lambdas[l];
    const MeanStats st = mean_stats(n, [&](std::size_t i) {
      const double x = lambda + samples.phi[i];
      return -std::exp(samples.log_weight[i]) * x / variance * normal_pdf(x, variance);
    });
    est.f_hat[l] = st.mean;
    est.std_err[l] = st.std_err;
    est.n_eff[l] = st.n_eff;
  }
  est.n_samples = n;
  est.n_failed = samples.failed;
  return est;
}

DensityEstimate estimate_density(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                 const McOptions& opts, const TiltSpec* tilt, double extra_variance) {
  if (extra_variance < 0.0) throw ConfigError("montecarlo: extra variance must be >= 0");
  DensityEstimate est = density_from_phi(draw_phi(kernel, opts, tilt), lambdas, kernel.sigma0_sq() + extra_variance);
  est.seed = opts.seed;
  return est;
}

DensityEstimate estimate_density_derivative(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                            const McOptions& opts, const TiltSpec* tilt) {
  DensityEstimate est = density_derivative_from_phi(draw_phi(kernel, opts, tilt), lambdas, kernel.sigma0_sq());
  est.seed = opts.seed;
  return est;
}

double TiltPolicy::theta_for(double lambda) const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::automatic:
      return lambda <= threshold ? theta : 0.0;
    case Kind::fixed:
      return lambda < 0.0 ? theta : 0.0;
  }
  return 0.0;
}

TiltPolicy TiltPolicy::parse(const std::string& text) {
  TiltPolicy p;
  if (text.empty() || text == "none") return p;
  if (text == "auto") {
    p.kind = Kind::automatic;
    return p;
  }
  std::size_t used = 0;
  double theta = 0.0;
  try {
    theta = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(theta >= 0.0 && theta <= 1.0)) {
    throw ConfigError("tilt must be none, auto or a strength theta in [0, 1], got '" + text + "'");
  }
  p.kind = theta == 0.0 ? Kind::none : Kind::fixed;
  p.theta = theta;
  return p;
}

std::string TiltPolicy::to_string() const {
  switch (kind) {
    case Kind::none:
      return "none";
    case Kind::automatic:
      return "auto";
    case Kind::fixed: {
      std::ostringstream os;
      os << theta;
      return os.str();
    }
  }
  return "none";
}

DensityEstimate estimate_density(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                 const McOptions& opts, const TiltPolicy& policy) {
  DensityEstimate est = empty_estimate(lambdas);
  est.seed = opts.seed;
  const double v = kernel.sigma0_sq();

  std::vector<double> plain;
  std::vector<std::size_t> plain_index;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    if (policy.theta_for(lambdas[l]) == 0.0) {
      plain.push_back(lambdas[l]);
      plain_index.push_back(l);
    }
  }
  if (!plain.empty()) {
    const DensityEstimate part = density_from_phi(draw_phi(kernel, opts), plain, v);
    for (std::size_t j = 0; j < plain.size(); ++j) {
      const std::size_t l = plain_index[j];
      est.f_hat[l] = part.f_hat[j];
      est.std_err[l] = part.std_err[j];
      est.n_eff[l] = part.n_eff[j];
    }
    est.n_samples += part.n_samples;
    est.n_failed += part.n_failed;
  }
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const double theta = policy.theta_for(lambdas[l]);
    if (theta == 0.0) continue;
    const TiltSpec tilt = make_tilt_toward_optimal(kernel, lambdas[l], theta);
    McOptions o = opts;
    o.stream = opts.stream + 1 + l;
    const DensityEstimate part = density_from_phi(draw_phi(kernel, o, &tilt), std::span(&lambdas[l], 1), v);
    est.f_hat[l] = part.f_hat[0];
    est.std_err[l] = part.std_err[0];
    est.n_eff[l] = part.n_eff[0];
    est.tilt_theta[l] = theta;
    est.n_samples += part.n_samples;
    est.n_failed += part.n_failed;
  }
  return est;
}

Lambda0Samples draw_lambda0(const CovarianceKernel& kernel, const McOptions& opts) {
  Lambda0Samples out;
  out.requested = opts.n_samples;
  out.values.assign(opts.n_samples, kNaN);
  detail::parallel_for(opts.n_samples, opts.threads, [&](std::size_t i) {
    SampleRng rng(opts.seed, opts.stream, i);
    const PotentialSample q = sample(kernel, rng);
    try {
      out.values[i] = ground_energy(q.values, opts.method, opts.solver);
    } catch (const NumericalError&) {
      out.values[i] = kNaN;
    }
  });
  out.failed = compact(out.values, nullptr);
  check_failures(out.failed, out.requested, opts.max_failure_fraction, "eigensolves");
  return out;
}

DensityEstimate kde_from_samples(const Lambda0Samples& samples, std::span<const double> lambdas, double bandwidth) {
  if (!(bandwidth > 0.0)) throw ConfigError("montecarlo: KDE bandwidth must be > 0");
  DensityEstimate est = empty_estimate(lambdas);
  const double v = bandwidth * bandwidth;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const MeanStats st = mean_stats(samples.values.size(),
                                    [&](std::size_t i) { return normal_pdf(lambdas[l] - samples.values[i], v); });
    est.f_hat[l] = st.mean;
    est.std_err[l] = st.std_err;
    est.n_eff[l] = st.n_eff;
  }
  est.n_samples = samples.values.size();
  est.n_failed = samples.failed;
  return est;
}

DensityEstimate estimate_density_direct(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                        const McOptions& opts, double bandwidth) {
  if (!(bandwidth > 0.0)) throw ConfigError("montecarlo: KDE bandwidth must be > 0");
  DensityEstimate est = kde_from_samples(draw_lambda0(kernel, opts), lambdas, bandwidth);
  est.seed = opts.seed;
  return est;
}

DistributionEstimate estimate_distribution_direct(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                                  const McOptions& opts) {
  const Lambda0Samples s = draw_lambda0(kernel, opts);
  DistributionEstimate est;
  est.lambdas.assign(lambdas.begin(), lambdas.end());
  for (double lambda : lambdas) {
    const MeanStats st =
        mean_stats(s.values.size(), [&](std::size_t i) { return s.values[i] > lambda ? 1.0 : 0.0; });
    est.p_hat.push_back(st.mean);
    est.std_err.push_back(st.std_err);
  }
  est.n_samples = s.values.size();
  est.n_failed = s.failed;
  est.seed = opts.seed;
  return est;
}

double automatic_s_max(std::span<const double> lambdas, double variance) {
  double s_max = 4.0;
  for (double lambda : lambdas) {
    s_max = std::max(s_max, 4.0 * std::sqrt(std::abs(lambda)));
    s_max = std::max(s_max, std::sqrt(std::max(0.0, -lambda) + 12.0 * std::sqrt(variance)));
  }
  return s_max;
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Gauss = boost::math::quadrature::gauss<double, 7>;

struct Segment {
  double a = 0.0;
  double b = 0.0;
  Grid value;
  double error = 0.0;
};

// One 15-point Gauss-Kronrod panel of a vector-valued integrand; the error
// estimate is the largest |Kronrod - Gauss| component.
template <class F>
Segment gk_panel(F& f, double a, double b, std::size_t dim) {
  const auto& xk = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double c = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  Grid kron(dim, 0.0), gauss(dim, 0.0);
  const Grid f0 = f(c);
  for (std::size_t d = 0; d < dim; ++d) {
    kron[d] = wk[0] * f0[d];
    gauss[d] = wg[0] * f0[d];
  }
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const Grid lo = f(c - hw * xk[i]);
    const Grid hi = f(c + hw * xk[i]);
    for (std::size_t d = 0; d < dim; ++d) {
      kron[d] += wk[i] * (lo[d] + hi[d]);
      if (i % 2 == 0) gauss[d] += wg[i / 2] * (lo[d] + hi[d]);
    }
  }
  Segment seg{a, b, Grid(dim), 0.0};
  for (std::size_t d = 0; d < dim; ++d) {
    seg.value[d] = hw * kron[d];
    seg.error = std::max(seg.error, std::abs(hw * (kron[d] - gauss[d])));
  }
  return seg;
}

}  // namespace

Grid thm23_inner(std::span<const double> q_tilde, std::span<const double> lambdas, double variance,
                 const SolverOptions& solver, const SQuadrature& quad) {
  const HillPropagator prop(q_tilde, solver.ode_steps);
  RiccatiOptions ropts;
  ropts.solver = solver;
  const std::size_t dim = lambdas.size();
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * variance);
  double phi_last = kNaN;
  auto integrand = [&](double s) {
    const double guess = std::isnan(phi_last) ? kNaN : -s * s - phi_last;
    const RiccatiData d = floquet_solve(prop, q_tilde, s, ropts, guess);
    phi_last = d.phi;
    const double jac = jacobian_J(d);
    Grid out(dim);
    for (std::size_t l = 0; l < dim; ++l) {
      const double x = lambdas[l] + d.phi + s * s;
      out[l] = norm * std::exp(-0.5 * x * x / variance) * jac;
    }
    return out;
  };

  const double s_max = quad.s_max > 0.0 ? quad.s_max : automatic_s_max(lambdas, variance);
  std::vector<Segment> segs;
  const int n0 = std::max(1, quad.initial_intervals);
  for (int k = 0; k < n0; ++k) {
    segs.push_back(gk_panel(integrand, s_max * k / n0, s_max * (k + 1) / n0, dim));
  }
  auto total_error = [&] {
    double e = 0.0;
    for (const auto& s : segs) e += s.error;
    return e;
  };
  int subdivisions = 0;
  while (total_error() > quad.tolerance) {
    if (subdivisions++ >= quad.max_subdivisions) {
      std::ostringstream msg;
      msg << "s-quadrature did not converge (error " << total_error() << ")";
      throw NumericalError("montecarlo", msg.str());
    }
    auto worst = std::max_element(segs.begin(), segs.end(),
                                  [](const Segment& x, const Segment& y) { return x.error < y.error; });
    const double a = worst->a, b = worst->b, mid = 0.5 * (a + b);
    *worst = gk_panel(integrand, a, mid, dim);
    segs.push_back(gk_panel(integrand, mid, b, dim));
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  Grid total(dim, 0.0);
  for (const auto& s : segs) {
    for (std::size_t d = 0; d < dim; ++d) total[d] += s.value[d];
  }
  return total;
}

DistributionEstimate estimate_distribution_thm23(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                                 const McOptions& opts, const SQuadrature& quad) {
  const double v = kernel.sigma0_sq();
  SQuadrature q = quad;
  if (q.s_max <= 0.0) q.s_max = automatic_s_max(lambdas, v);
  const std::size_t dim = lambdas.size();
  std::vector<Grid> inner(opts.n_samples);
  detail::parallel_for(opts.n_samples, opts.threads, [&](std::size_t i) {
    SampleRng rng(opts.seed, opts.stream, i);
    const PotentialSample sample_i = sample(kernel, rng);
    try {
      inner[i] = thm23_inner(sample_i.tilde_values, lambdas, v, opts.solver, q);
    } catch (const NumericalError&) {
      inner[i].clear();
    }
  });
  std::vector<Grid> ok;
  ok.reserve(inner.size());
  for (auto& g : inner) {
    if (!g.empty()) ok.push_back(std::move(g));
  }
  const std::size_t failed = opts.n_samples - ok.size();
  check_failures(failed, opts.n_samples, opts.max_failure_fraction, "Floquet quadratures");

  DistributionEstimate est;
  est.lambdas.assign(lambdas.begin(), lambdas.end());
  for (std::size_t l = 0; l < dim; ++l) {
    const MeanStats st = mean_stats(ok.size(), [&](std::size_t i) { return ok[i][l]; });
    est.p_hat.push_back(st.mean);
    est.std_err.push_back(st.std_err);
  }
  est.n_samples = ok.size();
  est.n_failed = failed;
  est.seed = opts.seed;
  return est;
}

TailSide parse_tail_side(const std::string& text) {
  if (text == "left") return TailSide::left;
  if (text == "right") return TailSide::right;
  throw ConfigError("side must be left or right, got '" + text + "'");
}

std::string to_string(TailSide side) { return side == TailSide::left ? "left" : "right"; }

double tail_rate_target(const CovarianceKernel& kernel, TailSide side) {
  return side == TailSide::right ? 0.5 / kernel.sigma0_sq() : 0.5 / kernel.at_zero();
}

TailFit fit_tail_rate(const DensityEstimate& est, TailSide side, double window_lo, double window_hi,
                      double target) {
  if (!(window_lo < window_hi)) throw ConfigError("tailfit: window must satisfy lo < hi");
  const double slack = 1e-9 * (1.0 + std::max(std::abs(window_lo), std::abs(window_hi)));
  Grid x, y;
  for (std::size_t l = 0; l < est.lambdas.size(); ++l) {
    const double lambda = est.lambdas[l];
    if (lambda < window_lo - slack || lambda > window_hi + slack) continue;
    if (!(est.f_hat[l] > 3.0 * est.std_err[l]) || !(est.f_hat[l] > 0.0)) {
      std::ostringstream msg;
      msg << "estimate at lambda = " << lambda << " is not informative (f_hat " << est.f_hat[l] << ", stderr "
          << est.std_err[l] << ")";
      throw NumericalError("montecarlo", msg.str());
    }
    x.push_back(lambda * lambda);
    y.push_back(std::log(est.f_hat[l]));
  }
  if (x.size() < 4) throw ConfigError("tailfit: window holds fewer than 4 grid points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw ConfigError("tailfit: window must contain distinct |lambda| values");
  TailFit fit;
  fit.side = side;
  fit.rate_hat = -sxy / sxx;
  fit.intercept = my + fit.rate_hat * mx;
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  fit.points = x.size();
  fit.target = target;
  fit.rel_err = std::abs(fit.rate_hat - target) / std::abs(target);
  return fit;
}

}  // namespace hillgse
