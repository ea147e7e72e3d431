#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hillgse/config.hpp"
#include "hillgse/montecarlo.hpp"

namespace hillgse {

inline constexpr const char* kToolVersion = "hill-gse 1.0.0";

/// Provenance written at the top of every result: tool version, the config
/// and its hash, the seed and sample counts.
struct RunInfo {
  std::string command;
  const RunConfig* config = nullptr;
  std::size_t n_samples = 0;
  std::size_t n_failed = 0;
};

/// %.16e: 17 significant digits, enough to round-trip a double.
std::string format_number(double x);

/// CSV with '#'-prefixed provenance lines, one header row, then data rows.
void write_csv(std::ostream& out, const RunInfo& info, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// Provenance block for JSON results.
nlohmann::json run_json(const RunInfo& info);

/// Writes `text` to `path`, or to stdout when path is empty or "-".
void write_text(const std::string& path, const std::string& text);

/// `<path>.run.json` next to an output file: wall-clock time and worker count,
/// kept out of the result itself so that reruns are byte-identical.
void write_sidecar(const std::string& path, const RunInfo& info, double wall_seconds, unsigned threads);

/// A density table read back from write_csv output, with the config from its header.
struct DensityTable {
  RunConfig config;
  DensityEstimate estimate;
};

DensityTable read_density_csv(const std::string& path);

/// Potential values from a file: either a `sample` CSV (row `row`), or any
/// text holding one number per line / comma-separated, '#' lines ignored.
Grid read_potential(const std::string& path, std::size_t row = 0);

}  // namespace hillgse
