#include "hillgse/variational.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hillgse/errors.hpp"
#include "hillgse/sampler.hpp"
#include "parallel.hpp"

namespace hillgse {
namespace {

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

struct Multiplier {
  Grid a;
  Grid p;
};

// a = -c psi^2 solves a' = 2 p a with p = psi'/psi; c fixes int a = int q / Khat(0),
// the zero mode of q = K a.
Multiplier multiplier_for(const CovarianceKernel& kernel, const GroundState& gs, std::span<const double> q) {
  Multiplier m;
  const double target = spectral::mean(q) / kernel.sigma0_sq();
  const Grid sq = [&] {
    Grid s(gs.psi.size());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = gs.psi[j] * gs.psi[j];
    return s;
  }();
  const double scale = target / spectral::mean(sq);
  m.a.resize(sq.size());
  for (std::size_t j = 0; j < sq.size(); ++j) m.a[j] = scale * sq[j];
  const Grid dpsi = spectral::derivative(gs.psi);
  m.p.resize(sq.size());
  for (std::size_t j = 0; j < sq.size(); ++j) m.p[j] = dpsi[j] / gs.psi[j];
  return m;
}

}  // namespace

double J_of(const CovarianceKernel& kernel, std::span<const double> q) { return 0.5 * kernel.quad_form_inv(q); }

double scale_to_eigenvalue(std::span<const double> q, double lambda, const SolverOptions& solver) {
  if (!(lambda < 0.0)) throw ConfigError("variational: lambda must be negative");
  const double sup = spectral::sup_norm(q);
  const double integral = spectral::mean(q);
  if (!(integral < 0.0) || *std::max_element(q.begin(), q.end()) >= 0.0) {
    throw NumericalError("variational", "potential lost negativity; cannot rescale to the target eigenvalue");
  }
  Grid scaled(q.size());
  auto f = [&](double beta) {
    for (std::size_t j = 0; j < q.size(); ++j) scaled[j] = beta * q[j];
    return ground_energy_galerkin(scaled, solver) - lambda;
  };
  // beta q >= lambda/2 pointwise at lo; int beta q = 2 lambda at hi.
  const double lo = 0.5 * std::abs(lambda) / sup;
  const double hi = 2.0 * std::abs(lambda) / std::abs(integral);
  const double flo = f(lo);
  const double fhi = f(hi);
  if (!(flo > 0.0) || !(fhi < 0.0)) throw NumericalError("variational", "beta bracket failure");
  boost::uintmax_t iters = 200;
  auto stop = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::abs(a); };
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, iters);
  return 0.5 * (a + b);
}

VariationalResult solve_euler_lagrange(const CovarianceKernel& kernel, double lambda, const VariationalOptions& opts,
                                       std::span<const double> start) {
  if (!(lambda < 0.0)) throw ConfigError("variational: lambda must be negative");
  const std::size_t n = kernel.grid_size();
  Grid q(n);
  if (start.empty()) {
    const Grid k = kernel.on_grid();
    for (std::size_t j = 0; j < n; ++j) q[j] = lambda * k[j] / kernel.at_zero();
  } else {
    if (start.size() != n) throw ConfigError("variational: start path has the wrong grid size");
    q.assign(start.begin(), start.end());
  }

  VariationalResult res;
  res.lambda = lambda;
  double last_step = std::numeric_limits<double>::infinity();
  double damping = 1.0;
  bool converged = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const double beta = scale_to_eigenvalue(q, lambda, opts.solver);
    for (double& v : q) v *= beta;
    const GroundState gs = ground_state_galerkin(q, opts.solver);
    const Multiplier m = multiplier_for(kernel, gs, q);
    const Grid next = kernel.apply(m.a);
    const double step = sup_diff(next, q);
    res.iterations = it;
    if (step <= opts.tolerance * std::abs(lambda)) {
      converged = true;
      break;
    }
    if (step > last_step) damping = 0.5;
    last_step = step;
    for (std::size_t j = 0; j < n; ++j) q[j] += damping * (next[j] - q[j]);
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "Euler-Lagrange iteration did not converge in " << opts.max_iterations << " iterations at lambda = "
        << lambda;
    throw NumericalError("variational", msg.str());
  }

  // q is feasible (rescaled at the top of the last iteration); report on it.
  const GroundState gs = ground_state_galerkin(q, opts.solver);
  const Multiplier m = multiplier_for(kernel, gs, q);
  res.q_opt = q;
  res.a_opt = m.a;
  res.p_opt = m.p;
  res.J_value = J_of(kernel, q);
  res.residuals.eigenvalue = std::abs(gs.lambda0 - lambda);
  res.residuals.consistency = sup_diff(q, kernel.apply(m.a));
  const Grid da = spectral::derivative(m.a);
  Grid el(n);
  for (std::size_t j = 0; j < n; ++j) el[j] = da[j] - 2.0 * m.p[j] * m.a[j];
  res.residuals.el = spectral::band_norm(el, opts.solver.galerkin_modes);
  if (*std::max_element(m.a.begin(), m.a.end()) >= 0.0) {
    throw NumericalError("variational", "multiplier a is not negative");
  }
  return res;
}

std::vector<RateRow> rate_curve(const CovarianceKernel& kernel, std::span<const double> lambdas,
                                const VariationalOptions& opts, unsigned threads) {
  std::vector<RateRow> rows(lambdas.size());
  detail::parallel_for(lambdas.size(), threads, [&](std::size_t i) {
    const VariationalResult r = solve_euler_lagrange(kernel, lambdas[i], opts);
    rows[i] = {lambdas[i], r.J_value / (lambdas[i] * lambdas[i]), 0.5 / kernel.at_zero(), r.residuals.eigenvalue,
               r.iterations};
  });
  return rows;
}

MultistartResult multistart(const CovarianceKernel& kernel, double lambda, std::size_t starts, std::uint64_t seed,
                            const VariationalOptions& opts) {
  MultistartResult out;
  out.best = solve_euler_lagrange(kernel, lambda, opts);
  out.J_values.push_back(out.best.J_value);
  for (std::size_t i = 0; i < starts; ++i) {
    SampleRng rng(seed, 0x5eed, i);
    const PotentialSample g = sample(kernel, rng);
    const double sup = spectral::sup_norm(g.values);
    Grid start(g.values.size());
    for (std::size_t j = 0; j < start.size(); ++j) start[j] = lambda * (1.0 + 0.3 * g.values[j] / sup);
    VariationalResult r = solve_euler_lagrange(kernel, lambda, opts, start);
    out.J_values.push_back(r.J_value);
    if (r.J_value < out.best.J_value) {
      out.best = std::move(r);
      out.best_index = i + 1;
    }
  }
  return out;
}

}  // namespace hillgse
