#include "rbfloi/errors.hpp"

namespace rbfloi {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
      return "config";
    case ErrorKind::parse:
      return "parse";
    case ErrorKind::singular:
      return "singular";
    case ErrorKind::sampling:
      return "sampling";
    case ErrorKind::divergence:
      return "divergence";
    case ErrorKind::convergence:
      return "convergence";
    case ErrorKind::dimension:
      return "dimension";
  }
  return "unknown";
}

}  // namespace rbfloi
