#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace otp {

// File system / stream failures. CLI maps these to exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed textual input: CSV structure, timestamps, numbers, query text.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration values (rates out of range, empty period, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Domain-level misuse: unknown metric, disallowed filter, bad aggregator.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by load_source when rows cannot be parsed; carries every issue
// found, each naming file and line.
class LoadError : public std::runtime_error {
 public:
  LoadError(const std::string& summary, std::vector<std::string> issues)
      : std::runtime_error(summary), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

}  // namespace otp
