#pragma once

#include <cstdint>

namespace polyreach::cli {

/// Prints one PASS/FAIL line per check; returns 0 when all pass.
int run_selftest(std::uint64_t seed);

}  // namespace polyreach::cli
