#pragma once

#include <stdexcept>
#include <string>

namespace hillgse {

/// Invalid user input: bad kernel parameters, malformed config, unknown flags.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed. Carries the name of the module that raised it
/// so the CLI can attribute the failure.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

}  // namespace hillgse
