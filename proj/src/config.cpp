#include "hillgse/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "hillgse/errors.hpp"

namespace hillgse {

using nlohmann::json;

RunConfig default_config() { return RunConfig{}; }

json to_json(const RunConfig& cfg) {
  json k;
  k["type"] = cfg.kernel.type;
  if (cfg.kernel.type == "ou") {
    k["m"] = cfg.kernel.m;
  } else {
    k["values"] = cfg.kernel.values;
  }
  json j;
  j["kernel"] = k;
  j["grid_size"] = cfg.grid_size;
  j["normalize"] = cfg.normalize;
  j["galerkin_modes"] = cfg.galerkin_modes;
  j["ode_steps"] = cfg.ode_steps;
  j["tolerance"] = cfg.tolerance;
  j["method"] = cfg.method;
  j["seed"] = cfg.seed;
  j["n_samples"] = cfg.n_samples;
  j["lambda_grid"] = {{"min", cfg.lambda_min}, {"max", cfg.lambda_max}, {"step", cfg.lambda_step}};
  j["tilt"] = cfg.tilt;
  j["bandwidth"] = cfg.bandwidth;
  j["s_tolerance"] = cfg.s_tolerance;
  j["max_failure_fraction"] = cfg.max_failure_fraction;
  return j;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  reject_unknown(j,
                 {"kernel", "grid_size", "normalize", "galerkin_modes", "ode_steps", "tolerance", "method", "seed",
                  "n_samples", "lambda_grid", "tilt", "bandwidth", "s_tolerance", "max_failure_fraction"},
                 "config");
  RunConfig cfg;
  if (j.contains("kernel")) {
    const json& k = j.at("kernel");
    if (!k.is_object()) throw ConfigError("config: kernel must be an object");
    reject_unknown(k, {"type", "m", "values"}, "kernel");
    take(k, "type", cfg.kernel.type);
    take(k, "m", cfg.kernel.m);
    take(k, "values", cfg.kernel.values);
    if (cfg.kernel.type != "ou" && cfg.kernel.type != "coeffs") {
      throw ConfigError("config: kernel type must be 'ou' or 'coeffs'");
    }
    if (cfg.kernel.type == "coeffs" && cfg.kernel.values.empty()) {
      throw ConfigError("config: coeffs kernel needs a non-empty 'values' list");
    }
  }
  take(j, "grid_size", cfg.grid_size);
  take(j, "normalize", cfg.normalize);
  take(j, "galerkin_modes", cfg.galerkin_modes);
  take(j, "ode_steps", cfg.ode_steps);
  take(j, "tolerance", cfg.tolerance);
  take(j, "method", cfg.method);
  take(j, "seed", cfg.seed);
  take(j, "n_samples", cfg.n_samples);
  if (j.contains("lambda_grid")) {
    const json& g = j.at("lambda_grid");
    reject_unknown(g, {"min", "max", "step"}, "lambda_grid");
    take(g, "min", cfg.lambda_min);
    take(g, "max", cfg.lambda_max);
    take(g, "step", cfg.lambda_step);
  }
  take(j, "tilt", cfg.tilt);
  take(j, "bandwidth", cfg.bandwidth);
  take(j, "s_tolerance", cfg.s_tolerance);
  take(j, "max_failure_fraction", cfg.max_failure_fraction);
  parse_eigen_method(cfg.method);
  if (!(cfg.tolerance > 0.0)) throw ConfigError("config: tolerance must be > 0");
  if (!(cfg.bandwidth > 0.0)) throw ConfigError("config: bandwidth must be > 0");
  if (!(cfg.lambda_step > 0.0) || !(cfg.lambda_min <= cfg.lambda_max)) {
    throw ConfigError("config: lambda_grid needs min <= max and step > 0");
  }
  return cfg;
}

RunConfig load_config(const std::string& source) {
  if (source.empty() || source == "default") return default_config();
  std::ifstream in(source);
  if (!in) throw ConfigError("config: cannot open '" + source + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: '" + source + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string canonical_config(const RunConfig& cfg) { return to_json(cfg).dump(); }

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CovarianceKernel make_kernel(const RunConfig& cfg) {
  if (cfg.kernel.type == "ou") return make_ou_kernel(cfg.kernel.m, cfg.grid_size, cfg.normalize);
  return make_kernel_from_coeffs(cfg.kernel.values, cfg.grid_size, cfg.normalize);
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions o;
  o.galerkin_modes = cfg.galerkin_modes;
  o.ode_steps = cfg.ode_steps;
  o.tolerance = cfg.tolerance;
  return o;
}

std::vector<double> lambda_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo <= hi)) throw ConfigError("lambda grid needs lo <= hi and step > 0");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

}  // namespace hillgse
