#pragma once

#include <stdexcept>
#include <string>

namespace wsnsim {

// Invalid scenario values, bad parameters, or engine misuse.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition of a numeric operation was violated.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised by the scenario parser; carries the offending key and line.
class ScenarioError : public ConfigError {
 public:
  ScenarioError(std::string key, int line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": '" + key + "': " + what),
        key_(std::move(key)),
        line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace wsnsim
