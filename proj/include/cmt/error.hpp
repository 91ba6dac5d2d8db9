#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmt {

enum class ErrorKind {
  dimension_mismatch,
  invalid_argument,
  parse,
  not_equilibrium,
  unsupported_spectrum,
  defective,
  inconsistent_split,
  resonance,
  divergence,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::parse: return "parse";
    case ErrorKind::not_equilibrium: return "not-equilibrium";
    case ErrorKind::unsupported_spectrum: return "unsupported-spectrum";
    case ErrorKind::defective: return "defective";
    case ErrorKind::inconsistent_split: return "inconsistent-split";
    case ErrorKind::resonance: return "resonance";
    case ErrorKind::divergence: return "divergence";
  }
  return "unknown";
}

/// Base of every error thrown by the library. The message is prefixed with
/// the originating module, e.g. "[spectral] unsupported-spectrum: ...".
class Error : public std::runtime_error {
 public:
  Error(std::string module, ErrorKind kind, const std::string& what)
      : std::runtime_error("[" + module + "] " + to_string(kind) + ": " + what),
        module_(std::move(module)),
        kind_(kind) {}

  const std::string& module() const noexcept { return module_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string module_;
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("sysdsl", ErrorKind::parse,
              "line " + std::to_string(line) + ", column " +
                  std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ResonanceError : public Error {
 public:
  ResonanceError(int degree, double condition)
      : Error("manifold", ErrorKind::resonance,
              "degree " + std::to_string(degree) +
                  " coefficient operator is singular (condition number " +
                  std::to_string(condition) + ")"),
        degree_(degree),
        condition_(condition) {}

  int degree() const noexcept { return degree_; }
  double condition() const noexcept { return condition_; }

 private:
  int degree_;
  double condition_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(double time, const std::string& what)
      : Error("sim", ErrorKind::divergence,
              what + " at t=" + std::to_string(time)),
        time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace cmt
