#pragma once

#include <stdexcept>
#include <string>

namespace mhmap {

/// Argument outside the open interval where a log-likelihood term is finite.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No strictly feasible start could be constructed for a window problem.
class InfeasibleStart : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateTriangle : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PointOutsideDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text-format error; carries the 1-based line number of the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class EmptyInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config-file error; names the offending key so the CLI can report it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace mhmap
