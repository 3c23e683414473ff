#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polyreach {

enum class ErrorKind {
  InvalidInput,
  DimensionMismatch,
  SingularSystem,
  Infeasible,
  Unbounded,
  EmptySet,
  UnboundedSet,
  ResourceLimit,
  StrategyViolation,
  Overflow,
  Parse,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` is stable and is what the
/// CLI maps onto exit codes and error records.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace polyreach
