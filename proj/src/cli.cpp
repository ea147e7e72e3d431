#include "hillgse/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "hillgse/config.hpp"
#include "hillgse/errors.hpp"
#include "hillgse/montecarlo.hpp"
#include "hillgse/output.hpp"
#include "hillgse/riccati.hpp"
#include "hillgse/sampler.hpp"
#include "hillgse/variational.hpp"
#include "hillgse/verify.hpp"

namespace hillgse::cli {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Sample streams per experiment; tilted density sets use kStreamDensity + 1 + i.
constexpr std::uint64_t kStreamDensity = 0;
constexpr std::uint64_t kStreamDirect = 1u << 20;
constexpr std::uint64_t kStreamThm23 = 2u << 20;

struct Common {
  std::string config = "default";
  unsigned threads = 1;
  std::string seed;
  std::string out;
};

RunConfig resolve_config(const Common& c) {
  RunConfig cfg = load_config(c.config);
  auto parse_seed = [](const std::string& text, const char* what) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || text.empty()) throw ConfigError(std::string(what) + " must be an unsigned integer");
    return static_cast<std::uint64_t>(v);
  };
  if (const char* env = std::getenv("HILL_GSE_SEED"); env && *env) cfg.seed = parse_seed(env, "HILL_GSE_SEED");
  if (!c.seed.empty()) cfg.seed = parse_seed(c.seed, "--seed");
  return cfg;
}

McOptions mc_options(const RunConfig& cfg, unsigned threads, std::uint64_t stream) {
  McOptions o;
  o.n_samples = cfg.n_samples;
  o.seed = cfg.seed;
  o.stream = stream;
  o.threads = threads;
  o.solver = solver_options(cfg);
  o.method = parse_eigen_method(cfg.method);
  o.max_failure_fraction = cfg.max_failure_fraction;
  return o;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos) {
      throw ConfigError(std::string(what) + ": cannot parse '" + cell + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string(what) + " is empty");
  return out;
}

// Emits a JSON result: to a file with a timing sidecar, or to stdout with the
// timing inline.
void emit_json(const Common& c, const RunInfo& info, json result, Clock::time_point start) {
  result["run"] = run_json(info);
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  if (c.out.empty() || c.out == "-") {
    result["run"]["wall_clock_seconds"] = wall;
    write_text("", result.dump(2) + "\n");
  } else {
    write_text(c.out, result.dump(2) + "\n");
    write_sidecar(c.out, info, wall, c.threads);
  }
}

void emit_csv(const Common& c, const RunInfo& info, const std::vector<std::string>& columns,
              const std::vector<std::vector<double>>& rows, Clock::time_point start) {
  std::ostringstream os;
  write_csv(os, info, columns, rows);
  write_text(c.out, os.str());
  if (!c.out.empty() && c.out != "-") {
    write_sidecar(c.out, info, std::chrono::duration<double>(Clock::now() - start).count(), c.threads);
  }
}

void add_common(CLI::App* app, Common& c, bool with_out = true) {
  app->add_option("--config", c.config, "JSON config file, or 'default'");
  app->add_option("--threads", c.threads, "Worker threads (0: all cores); never changes results");
  app->add_option("--seed", c.seed, "Override the config seed (beats HILL_GSE_SEED)");
  if (with_out) app->add_option("--out", c.out, "Output file (default: stdout)");
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Ground-state energy of Hill's operator with a stationary Gaussian potential"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common c;
  int verify_status = kOk;
  std::function<void()> action;

  // sample
  std::size_t n = 0;
  auto* sample_cmd = app.add_subcommand("sample", "Draw potential paths");
  add_common(sample_cmd, c);
  sample_cmd->add_option("--n", n, "Number of paths (default: config n_samples)");
  sample_cmd->callback([&] {
    action = [&] {
      const auto start = Clock::now();
      RunConfig cfg = resolve_config(c);
      if (n > 0) cfg.n_samples = n;
      const CovarianceKernel kernel = make_kernel(cfg);
      std::vector<std::vector<double>> rows(cfg.n_samples);
      for (std::size_t i = 0; i < cfg.n_samples; ++i) {
        SampleRng rng(cfg.seed, kStreamDensity, i);
        const PotentialSample s = sample(kernel, rng);
        rows[i].reserve(s.values.size() + 2);
        rows[i].push_back(static_cast<double>(i));
        rows[i].push_back(s.q0);
        rows[i].insert(rows[i].end(), s.values.begin(), s.values.end());
      }
      std::vector<std::string> cols{"index", "q0"};
      for (std::size_t j = 0; j < cfg.grid_size; ++j) cols.push_back("q_" + std::to_string(j));
      emit_csv(c, {"sample", &cfg, cfg.n_samples, 0}, cols, rows, start);
    };
  });

  // eig
  std::string potential;
  std::size_t row = 0;
  std::string method;
  auto* eig_cmd = app.add_subcommand("eig", "Ground state energy of one potential");
  add_common(eig_cmd, c);
  eig_cmd->add_option("--potential", potential, "Potential file (one value per line, or a sample CSV)")->required();
  eig_cmd->add_option("--row", row, "Row to use when the file is a sample CSV");
  eig_cmd->add_option("--method", method, "galerkin|discriminant (default: config)");
  eig_cmd->callback([&] {
    action = [&] {
      const auto start = Clock::now();
      RunConfig cfg = resolve_config(c);
      if (!method.empty()) cfg.method = method;
      const Grid q = read_potential(potential, row);
      const GroundState gs = ground_state(q, parse_eigen_method(cfg.method), solver_options(cfg));
      json r;
      r["lambda0"] = gs.lambda0;
      r["residual"] = gs.residual;
      r["method"] = to_string(gs.method);
      r["iterations"] = gs.iterations;
      r["grid_size"] = q.size();
      emit_json(c, {"eig", &cfg, 1, 0}, r, start);
    };
  });

  // phi
  auto* phi_cmd = app.add_subcommand("phi", "Riccati functional Phi of one potential");
  add_common(phi_cmd, c);
  phi_cmd->add_option("--potential", potential, "Potential file; its mean is removed first")->required();
  phi_cmd->add_option("--row", row, "Row to use when the file is a sample CSV");
  phi_cmd->callback([&] {
    action = [&] {
      const auto start = Clock::now();
      const RunConfig cfg = resolve_config(c);
      Grid q = read_potential(potential, row);
      const double q0 = spectral::mean(q);
      for (double& v : q) v -= q0;
      RiccatiOptions ro;
      ro.solver = solver_options(cfg);
      ro.method = parse_eigen_method(cfg.method);
      const RiccatiData d = phi(q, ro);
      json r;
      r["phi"] = d.phi;
      r["phi_logderiv"] = d.phi_logderiv;
      r["lambda0_tilde"] = d.lambda;
      r["residual"] = d.riccati_residual;
      r["q0_removed"] = q0;
      emit_json(c, {"phi", &cfg, 1, 0}, r, start);
    };
  });

  // density
  double lmin = NAN, lmax = NAN, step = NAN;
  std::string tilt;
  bool derivative = false;
  auto* density_cmd = app.add_subcommand("density", "Density of the ground state energy by the Phi formula");
  add_common(density_cmd, c);
  density_cmd->add_option("--lambda-min", lmin);
  density_cmd->add_option("--lambda-max", lmax);
  density_cmd->add_option("--step", step);
  density_cmd->add_option("--n", n, "Samples per sample set (default: config n_samples)");
  density_cmd->add_option("--tilt", tilt, "none | auto | theta in [0,1]");
  density_cmd->add_flag("--derivative", derivative, "Estimate f' instead of f (untilted)");
  density_cmd->callback([&] {
    action = [&] {
      const auto start = Clock::now();
      RunConfig cfg = resolve_config(c);
      if (n > 0) cfg.n_samples = n;
      if (!std::isnan(lmin)) cfg.lambda_min = lmin;
      if (!std::isnan(lmax)) cfg.lambda_max = lmax;
      if (!std::isnan(step)) cfg.lambda_step = step;
      if (!tilt.empty()) cfg.tilt = tilt;
      const TiltPolicy policy = TiltPolicy::parse(cfg.tilt);
      const CovarianceKernel kernel = make_kernel(cfg);
      const auto lambdas = lambda_grid(cfg.lambda_min, cfg.lambda_max, cfg.lambda_step);
      const McOptions mc = mc_options(cfg, c.threads, kStreamDensity);
      std::vector<std::vector<double>> rows;
      if (derivative) {
        if (policy.kind != TiltPolicy::Kind::none) throw ConfigError("--derivative does not support tilting");
        const DensityEstimate d = estimate_density_derivative(kernel, lambdas, mc);
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
          rows.push_back({d.lambdas[l], d.f_hat[l], d.std_err[l], d.n_eff[l]});
        }
        emit_csv(c, {"density --derivative", &cfg, d.n_samples, d.n_failed},
                 {"lambda", "fprime_hat", "stderr", "n_eff"}, rows, start);
        return;
      }
      const DensityEstimate d = estimate_density(kernel, lambdas, mc, policy);
      for (std::size_t l = 0; l < lambdas.size(); ++l) {
        rows.push_back({d.lambdas[l], d.f_hat[l], d.std_err[l], d.n_eff[l], d.tilt_theta[l]});
      }
      emit_csv(c, {"density", &cfg, d.n_samples, d.n_failed}, {"lambda", "f_hat", "stderr", "n_eff", "tilt_theta"},
               rows, start);
    };
  });

  // dist
  std::string lambda_text = "0";
  std::string dist_method = "thm23";
  auto* dist_cmd = app.add_subcommand("dist", "P(Lambda0 > lambda)");
  add_common(dist_cmd, c);
  dist_cmd->add_option("--lambda", lambda_text, "Energy or comma-separated energies");
  dist_cmd->add_option("--n", n, "Samples (default: config n_samples)");
  dist_cmd->add_option("--method", dist_method, "thm23 | direct");
  dist_cmd->callback([&] {
    action = [&] {
      const auto start = Clock::now();
      RunConfig cfg = resolve_config(c);
      if (n > 0) cfg.n_samples = n;
      const auto lambdas = parse_list(lambda_text, "--lambda");
      const CovarianceKernel kernel = make_kernel(cfg);
      DistributionEstimate d;
      if (dist_method == "thm23") {
        SQuadrature quad;
        quad.tolerance = cfg.s_tolerance;
        d = estimate_distribution_thm23(kernel, lambdas, mc_options(cfg, c.threads, kStreamThm23), quad);
      } else if (dist_method == "direct") {
        d = estimate_distribution_direct(kernel, lambdas, mc_options(cfg, c.threads, kStreamDirect));
      } else {
        throw ConfigError("--method must be thm23 or direct");
      }
      json r;
      r["method"] = dist_method;
      r["lambda"] = d.lambdas;
      r["p_hat"] = d.p_hat;
      r["stderr"] = d.std_err;
      emit_json(c, {"dist", &cfg, d.n_samples, d.n_failed}, r, start);
    };
  });

  // tailfit
  std::string in_path, side_text = "right", window;
  auto* tail_cmd = app.add_subcommand("tailfit", "Fit -log f / lambda^2 over a window of a density table");
  tail_cmd->add_option("--in", in_path, "CSV written by `density`")->required();
  tail_cmd->add_option("--side", side_text, "left | right");
  tail_cmd->add_option("--window", window, "lo:hi (default 3:6 right, -8:-4 left)");
  tail_cmd->add_option("--out", c.out, "Output file (default: stdout)");
  tail_cmd->callback([&] {
    action = [&] {
      const auto start = Clock::now();
      const DensityTable table = read_density_csv(in_path);
      const TailSide side = parse_tail_side(side_text);
      double lo = side == TailSide::right ? 3.0 : -8.0;
      double hi = side == TailSide::right ? 6.0 : -4.0;
      if (!window.empty()) {
        const auto colon = window.find(':');
        if (colon == std::string::npos) throw ConfigError("--window must look like lo:hi");
        std::string both = window;
        both[colon] = ',';
        const auto v = parse_list(both, "--window");
        if (v.size() != 2) throw ConfigError("--window must look like lo:hi");
        lo = v[0];
        hi = v[1];
      }
      const CovarianceKernel kernel = make_kernel(table.config);
      const TailFit fit = fit_tail_rate(table.estimate, side, lo, hi, tail_rate_target(kernel, side));
      json r;
      r["side"] = to_string(side);
      r["rate_hat"] = fit.rate_hat;
      r["target"] = fit.target;
      r["rel_err"] = fit.rel_err;
      r["window"] = {fit.window_lo, fit.window_hi};
      r["points"] = fit.points;
      r["intercept"] = fit.intercept;
      emit_json(c, {"tailfit", &table.config, 0, 0}, r, start);
    };
  });

  // variational
  std::string lambdas_text = "-10,-20,-50,-100";
  std::string dump_dir;
  std::size_t starts = 0;
  auto* var_cmd = app.add_subcommand("variational", "Minimize J(q) subject to Lambda0(q) = lambda");
  add_common(var_cmd, c);
  var_cmd->add_option("--lambdas", lambdas_text, "Comma-separated negative energies");
  var_cmd->add_option("--dump-qopt", dump_dir, "Directory for one CSV per minimizer path");
  var_cmd->add_option("--multistart", starts, "Extra random negative starts per lambda");
  var_cmd->callback([&] {
    action = [&] {
      const auto start = Clock::now();
      const RunConfig cfg = resolve_config(c);
      const auto lambdas = parse_list(lambdas_text, "--lambdas");
      const CovarianceKernel kernel = make_kernel(cfg);
      VariationalOptions vo;
      vo.solver = solver_options(cfg);
      if (!dump_dir.empty()) std::filesystem::create_directories(dump_dir);
      std::vector<std::vector<double>> rows;
      for (double lambda : lambdas) {
        const MultistartResult ms = multistart(kernel, lambda, starts, cfg.seed, vo);
        const VariationalResult& r = ms.best;
        rows.push_back({lambda, r.J_value / (lambda * lambda), 0.5 / kernel.at_zero(), r.residuals.eigenvalue,
                        static_cast<double>(r.iterations)});
        if (!dump_dir.empty()) {
          std::vector<std::vector<double>> path;
          for (std::size_t j = 0; j < r.q_opt.size(); ++j) {
            path.push_back({static_cast<double>(j) / static_cast<double>(r.q_opt.size()), r.q_opt[j], r.a_opt[j],
                            r.p_opt[j]});
          }
          std::ostringstream os;
          write_csv(os, {"variational --dump-qopt", &cfg, 0, 0}, {"x", "q_opt", "a_opt", "p_opt"}, path);
          std::ostringstream name;
          name << "qopt_lambda_" << lambda << ".csv";
          write_text((std::filesystem::path(dump_dir) / name.str()).string(), os.str());
        }
      }
      emit_csv(c, {"variational", &cfg, 0, 0}, {"lambda", "J_over_lambda2", "target", "eig_residual", "iters"}, rows,
               start);
    };
  });

  // verify
  std::size_t cases = 20;
  auto* verify_cmd = app.add_subcommand("verify", "Run the property suite and print a pass/fail table");
  add_common(verify_cmd, c, false);
  verify_cmd->add_option("--cases", cases, "Random draws per property");
  verify_cmd->callback([&] {
    action = [&] {
      const RunConfig cfg = resolve_config(c);
      const auto results = run_property_suite(cfg, cases, c.threads);
      bool all = true;
      std::printf("%-42s %6s %10s %12s  %s\n", "property", "cases", "violations", "worst", "status");
      for (const auto& r : results) {
        std::printf("%-42s %6zu %10zu %12.3e  %s\n", r.name.c_str(), r.cases, r.violations, r.worst,
                    r.passed() ? "PASS" : "FAIL");
        all = all && r.passed();
      }
      std::fflush(stdout);
      verify_status = all ? kOk : kVerifyFailed;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  try {
    if (action) action();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error [" << e.module() << "]: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return verify_status;
}

}  // namespace hillgse::cli
