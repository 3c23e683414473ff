#include "polyreach/error.hpp"

namespace polyreach {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::SingularSystem: return "singular-system";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Unbounded: return "unbounded";
    case ErrorKind::EmptySet: return "empty-set";
    case ErrorKind::UnboundedSet: return "unbounded-set";
    case ErrorKind::ResourceLimit: return "resource-limit";
    case ErrorKind::StrategyViolation: return "strategy-violation";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

}  // namespace polyreach
