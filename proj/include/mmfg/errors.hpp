#pragma once

#include <stdexcept>
#include <string>

namespace mmfg {

// Malformed or inconsistent user configuration (bad JSON, shape mismatch,
// non-PSD cost matrix, unknown key).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A backward coefficient ODE left the trust region before reaching t = 0.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double t_fail)
      : std::runtime_error(what), t_fail_(t_fail) {}
  double t_fail() const { return t_fail_; }

 private:
  double t_fail_;
};

// A simulated path escaped the sanity bound or produced non-finite values.
class SimulationDiverged : public std::runtime_error {
 public:
  explicit SimulationDiverged(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace mmfg
