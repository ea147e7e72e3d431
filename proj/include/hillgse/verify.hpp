#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hillgse/config.hpp"

namespace hillgse {

struct PropertyResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t violations = 0;
  double worst = 0.0;  // largest violation measure seen (property-specific)
  bool passed() const { return violations == 0; }
};

/// Property checks on random draws from the configured kernel: Lipschitz
/// bounds on Phi, the unit slope of q0 in lambda, the sup-norm bound by the
/// Cameron-Martin norm, positivity and finite-difference agreement of J, the
/// Phi = -Lambda0 identity and agreement of the two eigenvalue solvers.
/// `cases` sets the number of draws per property.
std::vector<PropertyResult> run_property_suite(const RunConfig& cfg, std::size_t cases, unsigned threads);

}  // namespace hillgse
