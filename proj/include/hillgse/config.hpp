#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hillgse/hill.hpp"
#include "hillgse/kernel.hpp"

namespace hillgse {

struct KernelSpec {
  std::string type = "ou";  // "ou" or "coeffs"
  double m = 1.0;
  std::vector<double> values;
};

/// Everything that determines a run's numbers. Output locations and the
/// worker count are deliberately absent: they never change results, and
/// leaving them out keeps the embedded config (and so the output bytes)
/// identical across machines and thread counts.
struct RunConfig {
  KernelSpec kernel;
  std::size_t grid_size = 512;
  bool normalize = false;
  std::size_t galerkin_modes = 64;
  std::size_t ode_steps = 4096;
  double tolerance = 1e-10;
  std::string method = "galerkin";
  std::uint64_t seed = 42;
  std::size_t n_samples = 10000;
  double lambda_min = -8.0;
  double lambda_max = 6.0;
  double lambda_step = 0.5;
  std::string tilt = "none";
  double bandwidth = 0.1;
  double s_tolerance = 1e-6;
  double max_failure_fraction = 1e-3;
};

RunConfig default_config();

/// "default" or a path to a JSON file; missing keys keep their defaults,
/// unknown keys are rejected.
RunConfig load_config(const std::string& source);

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

/// Compact JSON with sorted keys; the form embedded in output headers.
std::string canonical_config(const RunConfig& cfg);

/// FNV-1a 64-bit hash of canonical_config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

CovarianceKernel make_kernel(const RunConfig& cfg);
SolverOptions solver_options(const RunConfig& cfg);

/// lambda_min, lambda_min + step, ... up to lambda_max (inclusive, with
/// rounding slack). Values are computed as lambda_min + i * step.
std::vector<double> lambda_grid(double lo, double hi, double step);

}  // namespace hillgse
