#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cact {

enum class ErrorKind {
  Defective,
  Overflow,
  DimMismatch,
  IllConditioned,
  ZeroNorm,
  NearOrthogonal,
  NoConvergence,
  InsufficientData,
  Precondition,
  Blowup,
  NoImprovement,
  Parse,
  Validation,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

// Numerical failures share an exit code in the CLI.
bool is_numerical(ErrorKind kind);

}  // namespace cact
