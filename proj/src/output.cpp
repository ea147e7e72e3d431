#include "hillgse/output.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hillgse/errors.hpp"

namespace hillgse {

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

void write_csv(std::ostream& out, const RunInfo& info, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  out << "# tool: " << kToolVersion << '\n';
  out << "# command: " << info.command << '\n';
  if (info.config) {
    out << "# config: " << canonical_config(*info.config) << '\n';
    out << "# config_hash: " << config_hash(*info.config) << '\n';
    out << "# seed: " << info.config->seed << '\n';
  }
  out << "# samples: " << info.n_samples << " used, " << info.n_failed << " failed\n";
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
}

nlohmann::json run_json(const RunInfo& info) {
  nlohmann::json j;
  j["tool"] = kToolVersion;
  j["command"] = info.command;
  if (info.config) {
    j["config"] = to_json(*info.config);
    j["config_hash"] = config_hash(*info.config);
    j["seed"] = info.config->seed;
  }
  j["n_samples"] = info.n_samples;
  j["n_failed"] = info.n_failed;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("error writing '" + path + "'");
}

void write_sidecar(const std::string& path, const RunInfo& info, double wall_seconds, unsigned threads) {
  nlohmann::json j = run_json(info);
  j["wall_clock_seconds"] = wall_seconds;
  j["threads"] = threads;
  write_text(path + ".run.json", j.dump(2) + "\n");
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  return out;
}

bool parse_double(const std::string& text, double& value) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return false;
  const auto last = text.find_last_not_of(" \t\r");
  const std::string t = text.substr(first, last - first + 1);
  std::size_t used = 0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == t.size();
}

}  // namespace

DensityTable read_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  DensityTable table;
  bool have_config = false;
  std::vector<std::string> header;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# config: ";
      if (line.rfind(key, 0) == 0) {
        try {
          table.config = config_from_json(nlohmann::json::parse(line.substr(key.size())));
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError("'" + path + "': malformed config header: " + e.what());
        }
        have_config = true;
      }
      continue;
    }
    if (header.empty()) {
      header = split(line, ',');
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw ConfigError("'" + path + "': ragged row");
    auto& est = table.estimate;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v)) throw ConfigError("'" + path + "': non-numeric cell '" + cells[c] + "'");
      if (header[c] == "lambda") est.lambdas.push_back(v);
      else if (header[c] == "f_hat") est.f_hat.push_back(v);
      else if (header[c] == "stderr") est.std_err.push_back(v);
      else if (header[c] == "n_eff") est.n_eff.push_back(v);
      else if (header[c] == "tilt_theta") est.tilt_theta.push_back(v);
    }
  }
  if (!have_config) throw ConfigError("'" + path + "' has no '# config:' header line");
  const auto& est = table.estimate;
  if (est.lambdas.empty() || est.f_hat.size() != est.lambdas.size() || est.std_err.size() != est.lambdas.size()) {
    throw ConfigError("'" + path + "' is not a density table (need lambda, f_hat, stderr columns)");
  }
  return table;
}

Grid read_potential(const std::string& path, std::size_t row) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  Grid values;
  std::string line;
  bool sample_table = false;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (!sample_table && values.empty() && !cells.empty() && cells[0] == "index") {
      sample_table = true;
      continue;
    }
    if (sample_table) {
      if (data_row++ != row) continue;
      for (std::size_t c = 2; c < cells.size(); ++c) {
        double v = 0.0;
        if (!parse_double(cells[c], v)) throw ConfigError("'" + path + "': non-numeric cell '" + cells[c] + "'");
        values.push_back(v);
      }
      break;
    }
    for (const auto& cell : cells) {
      double v = 0.0;
      if (parse_double(cell, v)) {
        values.push_back(v);
      } else if (cell.find_first_not_of(" \t\r") != std::string::npos && !values.empty()) {
        throw ConfigError("'" + path + "': non-numeric cell '" + cell + "'");
      }
    }
  }
  if (values.empty()) throw ConfigError("'" + path + "' holds no potential values");
  return values;
}

}  // namespace hillgse
