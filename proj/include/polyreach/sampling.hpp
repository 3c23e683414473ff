#pragma once

// Random instances for property checks. Every generator takes the engine by
// reference so callers control seeding.

#include <cstddef>
#include <random>
#include <vector>

#include "polyreach/geometry.hpp"
#include "polyreach/poly.hpp"

namespace polyreach {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
Point sample_box(Rng& rng, const Box& b);

/// Box with lower corner in [-range, range] and widths in [min_width, max_width].
Box random_box(Rng& rng, std::size_t n, double range, double min_width, double max_width);

/// Dense polynomial with per-axis degree <= max_degree on every axis,
/// coefficients in [-1, 1] and parameter gradients in [-1, 1].
ParamPoly random_poly(Rng& rng, std::size_t n, std::size_t m, int max_degree);

/// Every exponent <= 1.
ParamPoly random_multiaffine(Rng& rng, std::size_t n, std::size_t m);

}  // namespace polyreach
