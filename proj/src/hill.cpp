#include "hillgse/hill.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hillgse/errors.hpp"

namespace hillgse {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kRenormalizations = 16;

struct Frame {
  double y1, z1, y2, z2;
};

// One RK4 step of y'' = w y for two solutions at once. w0, wh, w1 are q - lambda
// at the start, midpoint and end of the step.
inline void rk4_step(Frame& f, double h, double w0, double wh, double w1) {
  const double hh = 0.5 * h;
  auto advance = [&](double& y, double& z) {
    const double k1y = z, k1z = w0 * y;
    const double k2y = z + hh * k1z, k2z = wh * (y + hh * k1y);
    const double k3y = z + hh * k2z, k3z = wh * (y + hh * k2y);
    const double k4y = z + h * k3z, k4z = w1 * (y + h * k3y);
    y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
  };
  advance(f.y1, f.z1);
  advance(f.y2, f.z2);
}

inline void rk4_step(double& y, double& z, double h, double w0, double wh, double w1) {
  const double hh = 0.5 * h;
  const double k1y = z, k1z = w0 * y;
  const double k2y = z + hh * k1z, k2z = wh * (y + hh * k1y);
  const double k3y = z + hh * k2z, k3z = wh * (y + hh * k2y);
  const double k4y = z + h * k3z, k4z = w1 * (y + h * k3y);
  y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
  z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
}

void check_grid(std::span<const double> q) {
  if (!spectral::is_power_of_two(q.size()) || q.size() < 16) {
    throw ConfigError("hill: potential grid size must be a power of two >= 16");
  }
}

// Real orthonormal basis {1, sqrt2 cos(2 pi k x), sqrt2 sin(2 pi k x)}, k = 1..M.
// Index 0 is the constant, 1..M the cosines, M+1..2M the sines.
Eigen::MatrixXd galerkin_matrix(const Spectrum& qhat, std::size_t modes) {
  const auto m = static_cast<long>(modes);
  const auto top = static_cast<long>(qhat.size()) - 1;  // Nyquist index, treated as absent
  auto re = [&](long k) { k = std::abs(k); return k < top ? qhat[k].real() : 0.0; };
  auto im = [&](long k) {
    const double sign = k < 0 ? -1.0 : 1.0;
    k = std::abs(k);
    return k < top ? sign * qhat[k].imag() : 0.0;
  };
  const long dim = 2 * m + 1;
  Eigen::MatrixXd h(dim, dim);
  const double r2 = std::numbers::sqrt2;
  h(0, 0) = re(0);
  for (long k = 1; k <= m; ++k) {
    h(0, k) = h(k, 0) = r2 * re(k);
    h(0, m + k) = h(m + k, 0) = -r2 * im(k);
  }
  for (long j = 1; j <= m; ++j) {
    for (long k = j; k <= m; ++k) {
      h(j, k) = h(k, j) = re(j - k) + re(j + k);
      h(m + j, m + k) = h(m + k, m + j) = re(j - k) - re(j + k);
    }
    for (long k = 1; k <= m; ++k) {
      h(j, m + k) = h(m + k, j) = -im(j + k) - im(k - j);
    }
    const double kin = (kTwoPi * static_cast<double>(j)) * (kTwoPi * static_cast<double>(j));
    h(j, j) += kin;
    h(m + j, m + j) += kin;
  }
  return h;
}

struct GalerkinEigen {
  double lambda;
  Eigen::VectorXd vec;
  int iterations;
};

GalerkinEigen galerkin_solve(std::span<const double> q, const SolverOptions& opts) {
  check_grid(q);
  const std::size_t modes = opts.galerkin_modes;
  if (modes < 1 || modes > q.size() / 2) {
    throw ConfigError("hill: galerkin_modes must lie in [1, grid_size/2]");
  }
  const Spectrum qhat = spectral::forward(q);
  const Eigen::MatrixXd h = galerkin_matrix(qhat, modes);
  const double qsup = spectral::sup_norm(q);
  double shift = *std::min_element(q.begin(), q.end()) - 1.0;

  Eigen::MatrixXd a = h;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int attempt = 0;; ++attempt) {
    a = h;
    a.diagonal().array() -= shift;
    llt.compute(a);
    if (llt.info() == Eigen::Success) break;
    if (attempt >= 8) throw NumericalError("hill", "Galerkin shift could not be made positive definite");
    shift -= 1.0 + qsup;
  }

  Eigen::VectorXd v = Eigen::VectorXd::Zero(h.rows());
  v(0) = 1.0;
  const double target = opts.tolerance * (1.0 + qsup);
  double rho = h(0, 0);
  double residual = 0.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    v = llt.solve(v);
    v.normalize();
    const Eigen::VectorXd hv = h * v;
    rho = v.dot(hv);
    residual = (hv - rho * v).norm();
    if (residual <= target) return {rho, std::move(v), it};
  }
  std::ostringstream msg;
  msg << "inverse iteration did not converge in " << opts.max_iterations << " iterations (residual "
      << residual << ")";
  throw NumericalError("hill", msg.str());
}

Grid normalized_positive(Grid psi) {
  double sum = 0.0;
  for (double v : psi) sum += v;
  const double sign = sum < 0.0 ? -1.0 : 1.0;
  double sq = 0.0;
  for (double v : psi) sq += v * v;
  const double scale = sign / std::sqrt(sq / static_cast<double>(psi.size()));
  for (double& v : psi) v *= scale;
  return psi;
}

void require_positive(const Grid& psi) {
  const double lo = *std::min_element(psi.begin(), psi.end());
  if (!(lo > 0.0)) {
    std::ostringstream msg;
    msg << "ground state is not positive on the grid (min " << lo << "); discretization too coarse";
    throw NumericalError("hill", msg.str());
  }
}

}  // namespace

std::string to_string(EigenMethod m) { return m == EigenMethod::galerkin ? "galerkin" : "discriminant"; }

EigenMethod parse_eigen_method(const std::string& name) {
  if (name == "galerkin") return EigenMethod::galerkin;
  if (name == "discriminant") return EigenMethod::discriminant;
  throw ConfigError("unknown eigen method '" + name + "' (expected galerkin|discriminant)");
}

double MonodromyData::log_determinant() const {
  const double det = scaled.determinant();
  return std::log(std::abs(det)) + 2.0 * log_scale;
}

HillPropagator::HillPropagator(std::span<const double> q, std::size_t ode_steps) : steps_(ode_steps) {
  check_grid(q);
  if (!spectral::is_power_of_two(ode_steps) || ode_steps < q.size()) {
    throw ConfigError("hill: ode_steps must be a power of two >= grid_size");
  }
  fine_ = spectral::resample(q, 4 * ode_steps);
  q_min_ = *std::min_element(q.begin(), q.end());
  q_max_ = *std::max_element(q.begin(), q.end());
  q_mean_ = spectral::mean(q);
}

MonodromyData HillPropagator::monodromy(double lambda) const { return propagate(lambda, 1); }

MonodromyData HillPropagator::propagate(double lambda, int substeps) const {
  const double h = 1.0 / static_cast<double>(steps_ * substeps);
  const std::size_t stride = 4 / static_cast<std::size_t>(substeps);
  const std::size_t total = steps_ * static_cast<std::size_t>(substeps);
  const std::size_t block = std::max<std::size_t>(1, total / kRenormalizations);
  Frame f{1.0, 0.0, 0.0, 1.0};
  double log_scale = 0.0;
  for (std::size_t j = 0; j < total; ++j) {
    const std::size_t i = stride * j;
    const double w1 = (i + stride < fine_.size() ? fine_[i + stride] : fine_[0]) - lambda;
    rk4_step(f, h, fine_[i] - lambda, fine_[i + stride / 2] - lambda, w1);
    if ((j + 1) % block == 0) {
      const double m = std::max({std::abs(f.y1), std::abs(f.z1), std::abs(f.y2), std::abs(f.z2)});
      f.y1 /= m; f.z1 /= m; f.y2 /= m; f.z2 /= m;
      log_scale += std::log(m);
    }
  }
  MonodromyData out;
  out.scaled << f.y1, f.y2, f.z1, f.z2;
  out.log_scale = log_scale;
  out.discriminant = std::exp(log_scale) * (f.y1 + f.z2);
  return out;
}

FloquetSolution HillPropagator::floquet(double lambda, double s) const {
  // The eigenvector must come from the same discretization as the trajectory,
  // or psi(1)/psi(0) misses e^s and p jumps at the period boundary.
  const MonodromyData mono = propagate(lambda, 2);
  const Eigen::Matrix2d& m = mono.scaled;
  // Eigenvector of the transfer matrix for the multiplier e^s, in scaled units.
  const double rho = std::exp(s - mono.log_scale);
  Eigen::Vector2d a(m(0, 1), rho - m(0, 0));
  Eigen::Vector2d b(rho - m(1, 1), m(1, 0));
  Eigen::Vector2d v = a.norm() >= b.norm() ? a : b;
  if (v.norm() == 0.0) v = Eigen::Vector2d(1.0, 0.0);
  if (v(0) < 0.0) v = -v;
  v.normalize();

  FloquetSolution out;
  out.lambda = lambda;
  out.log_multiplier = s;
  out.p.resize(steps_);
  out.log_psi.resize(steps_);
  const double h = 1.0 / static_cast<double>(steps_);
  double y = v(0), z = v(1);
  double log_scale = 0.0;
  for (std::size_t j = 0; j < steps_; ++j) {
    if (!(y > 0.0)) out.positive = false;
    out.p[j] = z / y;
    out.log_psi[j] = std::log(std::abs(y)) + log_scale;
    // Two half steps: the trajectory feeds spectral derivatives of p, which
    // amplify the integration error.
    const std::size_t i = 4 * j;
    const double w2 = (i + 4 < fine_.size() ? fine_[i + 4] : fine_[0]) - lambda;
    rk4_step(y, z, 0.5 * h, fine_[i] - lambda, fine_[i + 1] - lambda, fine_[i + 2] - lambda);
    rk4_step(y, z, 0.5 * h, fine_[i + 2] - lambda, fine_[i + 3] - lambda, w2);
    const double mag = std::max(std::abs(y), std::abs(z));
    if (mag > 1e100 || mag < 1e-100) {
      y /= mag;
      z /= mag;
      log_scale += std::log(mag);
    }
  }
  if (!(y > 0.0)) out.positive = false;
  const double log0 = out.log_psi.front();
  for (double& l : out.log_psi) l -= log0;
  out.log_psi_period = std::log(std::abs(y)) + log_scale - log0;
  return out;
}

MonodromyData monodromy(std::span<const double> q, double lambda, std::size_t ode_steps) {
  return HillPropagator(q, ode_steps).monodromy(lambda);
}

double eigen_residual(std::span<const double> q, std::span<const double> psi, double lambda, std::size_t band) {
  const Grid d2 = spectral::derivative(spectral::derivative(psi));
  Grid r(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) r[j] = -d2[j] + (q[j] - lambda) * psi[j];
  return spectral::band_norm(r, band);
}

GroundState ground_state_galerkin(std::span<const double> q, const SolverOptions& opts) {
  GalerkinEigen eig = galerkin_solve(q, opts);
  const std::size_t n = q.size();
  const auto m = static_cast<long>(opts.galerkin_modes);
  Spectrum c(n / 2 + 1, Complex(0.0, 0.0));
  c[0] = eig.vec(0);
  for (long k = 1; k <= m && k < static_cast<long>(n / 2); ++k) {
    c[k] = Complex(eig.vec(k), -eig.vec(m + k)) / std::numbers::sqrt2;
  }
  GroundState gs;
  gs.lambda0 = eig.lambda;
  gs.psi = normalized_positive(spectral::inverse(c, n));
  gs.method = EigenMethod::galerkin;
  gs.iterations = eig.iterations;
  require_positive(gs.psi);
  gs.residual = eigen_residual(q, gs.psi, gs.lambda0, opts.galerkin_modes);
  return gs;
}

double ground_energy_galerkin(std::span<const double> q, const SolverOptions& opts) {
  return galerkin_solve(q, opts).lambda;
}

namespace {

double discriminant_root(const HillPropagator& prop, const SolverOptions& opts, int& evaluations) {
  auto f = [&](double lambda) {
    ++evaluations;
    return prop.monodromy(lambda).discriminant - 2.0;
  };
  double lo = prop.min_potential() - 1.0;
  double hi = prop.mean_potential() + 1.0;
  double flo = f(lo);
  double fhi = f(hi);
  if (!(flo > 0.0)) throw NumericalError("hill", "discriminant bracket failure: Delta(min q - 1) <= 2");
  if (!(fhi < 0.0)) {
    // Upper end landed beyond the first periodic band; look for Delta < 2 below it.
    bool found = false;
    constexpr int kScan = 64;
    for (int i = 1; i < kScan && !found; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / kScan;
      const double fx = f(x);
      if (fx < 0.0) {
        hi = x;
        fhi = fx;
        found = true;
      }
    }
    if (!found) throw NumericalError("hill", "discriminant bracket failure; discretization too coarse");
  }
  boost::uintmax_t max_iter = static_cast<boost::uintmax_t>(opts.max_iterations);
  const double tol = 1e-14;
  auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol * (1.0 + std::abs(a)); };
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, max_iter);
  if (static_cast<int>(max_iter) >= opts.max_iterations) {
    throw NumericalError("hill", "discriminant root-finding did not converge");
  }
  return 0.5 * (a + b);
}

}  // namespace

GroundState ground_state_discriminant(std::span<const double> q, const SolverOptions& opts) {
  const HillPropagator prop(q, opts.ode_steps);
  int evaluations = 0;
  const double lambda = discriminant_root(prop, opts, evaluations);
  const FloquetSolution sol = prop.floquet(lambda, 0.0);
  if (!sol.positive) throw NumericalError("hill", "periodic solution from the monodromy eigenvector changes sign");
  const std::size_t n = q.size();
  const std::size_t stride = prop.steps() / n;
  Grid psi(n);
  double top = sol.log_psi[0];
  for (double l : sol.log_psi) top = std::max(top, l);
  for (std::size_t j = 0; j < n; ++j) psi[j] = std::exp(sol.log_psi[j * stride] - top);
  GroundState gs;
  gs.lambda0 = lambda;
  gs.psi = normalized_positive(std::move(psi));
  gs.method = EigenMethod::discriminant;
  gs.iterations = evaluations;
  require_positive(gs.psi);
  gs.residual = eigen_residual(q, gs.psi, lambda, n / 4);
  return gs;
}

GroundState ground_state(std::span<const double> q, EigenMethod method, const SolverOptions& opts) {
  return method == EigenMethod::galerkin ? ground_state_galerkin(q, opts) : ground_state_discriminant(q, opts);
}

double ground_energy(std::span<const double> q, EigenMethod method, const SolverOptions& opts) {
  if (method == EigenMethod::galerkin) return ground_energy_galerkin(q, opts);
  const HillPropagator prop(q, opts.ode_steps);
  int evaluations = 0;
  return discriminant_root(prop, opts, evaluations);
}

}  // namespace hillgse
