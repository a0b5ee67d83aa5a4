#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace thermolab {

// Bad arguments to an operation (wrong depth, out-of-range symbol, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The model violates a structural assumption (not primitive, too few branches).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters that cannot be realized (empty length window, bad config values).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg), messages_{msg} {}
  explicit ConfigError(std::vector<std::string> msgs)
      : std::runtime_error(join(msgs)), messages_(std::move(msgs)) {}
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  static std::string join(const std::vector<std::string>& m) {
    std::string out;
    for (const auto& s : m) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> messages_;
};

// Iterative method failed to converge; carries the tail of the iteration trace.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& msg, std::vector<double> trace = {})
      : std::runtime_error(msg), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace thermolab
