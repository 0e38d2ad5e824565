#pragma once

#include <stdexcept>
#include <string>

namespace texwave {

/// Error categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
  Parse,        // malformed file contents
  Bounds,       // rectangle outside an image
  Size,         // input too small for the requested operation
  Shape,        // mismatched layouts or grid dimensions
  Degenerate,   // input carries no usable information
  Stratify,     // cross-validation folds cannot be formed
  Training,     // binary SVM given a single class
  Convergence,  // SMO exceeded its iteration budget
  Config,       // invalid user-supplied configuration
  Io,           // filesystem failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Thrown by SMO when the iteration budget is exhausted.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double worst_violation)
      : Error(ErrorKind::Convergence, what), worst_violation_(worst_violation) {}

  double worst_violation() const noexcept { return worst_violation_; }

 private:
  double worst_violation_;
};

}  // namespace texwave
