#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace chiralloc {

// Base class for everything the library throws on purpose. Precondition
// violations on plain arguments use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration problems: unknown key, bad type, out-of-range value.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, int line, const std::string& what)
      : Error(format(key, line, what)), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  // 0 when the value came from a command-line flag rather than a file.
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& key, int line,
                            const std::string& what) {
    std::string out = "config key '" + key + "'";
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    return out + ": " + what;
  }

  std::string key_;
  int line_;
};

// Integrator, eigensolver or fit failures that depend on the numbers.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, double time = -1.0)
      : Error(what), time_(time) {}

  // Simulation time (in units of 1/gamma) at which the failure happened, or
  // a negative value when there is no meaningful time.
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// A realization inside an ensemble failed; carries the realization index.
class EnsembleError : public NumericalError {
 public:
  EnsembleError(std::size_t realization, const std::string& what)
      : NumericalError("realization " + std::to_string(realization) + ": " +
                       what),
        realization_(realization) {}

  std::size_t realization() const noexcept { return realization_; }

 private:
  std::size_t realization_;
};

}  // namespace chiralloc
