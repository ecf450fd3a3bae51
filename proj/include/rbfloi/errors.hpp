#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rbfloi {

enum class ErrorKind {
  config,
  parse,
  singular,
  sampling,
  divergence,
  convergence,
  dimension,
};

std::string_view to_string(ErrorKind kind);

// Every failure the library reports carries a machine-readable kind so the
// CLI can emit "error: <kind>: <message>" and exit nonzero.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& message, long pivot)
      : Error(ErrorKind::singular, message), pivot_(pivot) {}

  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

}  // namespace rbfloi
