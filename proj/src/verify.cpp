#include "hillgse/verify.hpp"

#include <algorithm>
#include <cmath>

#include "hillgse/errors.hpp"
#include "hillgse/riccati.hpp"
#include "hillgse/sampler.hpp"
#include "parallel.hpp"

namespace hillgse {
namespace {

// Streams used by the suite, away from the Monte Carlo streams.
constexpr std::uint64_t kStreamBase = 0x7e51f;

struct Outcome {
  bool violated = false;
  double measure = 0.0;
};

template <class Check>
PropertyResult run_cases(const std::string& name, std::size_t cases, unsigned threads, Check check) {
  std::vector<Outcome> out(cases);
  detail::parallel_for(cases, threads, [&](std::size_t i) {
    try {
      out[i] = check(i);
    } catch (const NumericalError& e) {
      out[i] = {true, std::numeric_limits<double>::infinity()};
    }
  });
  PropertyResult r;
  r.name = name;
  r.cases = cases;
  for (const auto& o : out) {
    if (o.violated) ++r.violations;
    r.worst = std::max(r.worst, o.measure);
  }
  return r;
}

}  // namespace

std::vector<PropertyResult> run_property_suite(const RunConfig& cfg, std::size_t cases, unsigned threads) {
  const CovarianceKernel kernel = make_kernel(cfg);
  const SolverOptions solver = solver_options(cfg);
  RiccatiOptions ropts;
  ropts.solver = solver;
  auto draw = [&](std::uint64_t stream, std::size_t i) {
    SampleRng rng(cfg.seed, kStreamBase + stream, i);
    return sample(kernel, rng);
  };
  std::vector<PropertyResult> results;

  results.push_back(run_cases("Phi Lipschitz in sup norm", cases, threads, [&](std::size_t i) {
    const PotentialSample f = draw(0, 2 * i), g = draw(0, 2 * i + 1);
    const double pf = phi(f.tilde_values, ropts).phi;
    const double pg = phi(g.tilde_values, ropts).phi;
    Grid d(f.tilde_values.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = f.tilde_values[j] - g.tilde_values[j];
    const double excess = std::max(std::abs(pf - pg) - spectral::sup_norm(d),
                                   std::abs(pf) - spectral::sup_norm(f.tilde_values));
    return Outcome{excess > 0.0, std::max(0.0, excess)};
  }));

  results.push_back(run_cases("q0 has unit slope in lambda", cases, threads, [&](std::size_t i) {
    const PotentialSample f = draw(1, i);
    const double s = 0.1 + 0.5 * static_cast<double>(i % 4);
    const Lemma21Report rep = check_lemma21(f.tilde_values, s, -1.0 + 0.1 * static_cast<double>(i % 7), 1e-3, ropts);
    return Outcome{!rep.passed, std::abs(rep.slope - 1.0)};
  }));

  results.push_back(run_cases("sup^2 <= K(0) * Cameron-Martin norm", cases, threads, [&](std::size_t i) {
    const PotentialSample f = draw(2, i);
    const double lhs = std::pow(spectral::sup_norm(f.values), 2);
    const double rhs = kernel.at_zero() * kernel.quad_form_inv(f.values);
    return Outcome{lhs > rhs * (1.0 + 1e-12), std::max(0.0, lhs / rhs - 1.0)};
  }));

  results.push_back(run_cases("J(s, q~) > 0 and matches d q0 / d s", cases, threads, [&](std::size_t i) {
    const PotentialSample f = draw(3, i);
    const double s = 0.05 + 1.95 * static_cast<double>(i + 1) / static_cast<double>(cases + 1);
    const double jac = jacobian_J(f.tilde_values, s, ropts);
    const double h = 1e-4;
    const double up = floquet_solve(f.tilde_values, s + h, ropts).lambda;
    const double dn = floquet_solve(f.tilde_values, s - h, ropts).lambda;
    const double fd = -(up - dn) / (2.0 * h);
    const double rel = std::abs(jac - fd) / std::abs(fd);
    return Outcome{!(jac > 0.0) || rel > 1e-4, rel};
  }));

  results.push_back(run_cases("Phi = -Lambda0(q~)", cases, threads, [&](std::size_t i) {
    const PotentialSample f = draw(4, i);
    RiccatiOptions loose = ropts;
    loose.identity_tol = std::numeric_limits<double>::infinity();
    const RiccatiData d = phi(f.tilde_values, loose);
    const double gap = std::abs(d.phi - d.phi_logderiv);
    return Outcome{gap > 1e-8 || d.phi < 0.0, gap};
  }));

  results.push_back(run_cases("Galerkin and discriminant solvers agree", cases, threads, [&](std::size_t i) {
    const PotentialSample f = draw(5, i);
    const double a = ground_energy(f.values, EigenMethod::galerkin, solver);
    const double b = ground_energy(f.values, EigenMethod::discriminant, solver);
    const double gap = std::abs(a - b) / (1.0 + spectral::sup_norm(f.values));
    return Outcome{gap > 1e-8, gap};
  }));

  return results;
}

}  // namespace hillgse
