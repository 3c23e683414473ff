#pragma once

// Parametric Bernstein expansion over the unit box and affine bound functions
// fitted to the control points by linear least squares.

#include <cstddef>
#include <span>
#include <vector>

#include "polyreach/geometry.hpp"
#include "polyreach/numkernel.hpp"
#include "polyreach/poly.hpp"

namespace polyreach {

inline constexpr int kBernsteinDegreeCap = 12;

/// Dense coefficients b_i(p) for every i <= degree, in the order of
/// indices_le(degree).
struct BernsteinForm {
  MultiIndex degree;
  std::vector<MultiIndex> indices;
  std::vector<AffineCoeff> coeffs;
  std::size_t n_params = 0;

  std::size_t size() const { return coeffs.size(); }
  const AffineCoeff& at(const MultiIndex& i) const;
};

/// b_i(p) = sum_{j <= i} prod_k C(i_k, j_k) / C(d_k, j_k) * a_j(p).
/// Throws ResourceLimit when some axis degree exceeds kBernsteinDegreeCap.
BernsteinForm bernstein_coefficients(const ParamPoly& poly);

/// Row j = (i^j_1 / d_1, ..., i^j_n / d_n, 1). Zero-degree axes get a zero
/// column.
Matrix control_matrix(const MultiIndex& degree);

/// Vertex mean when the vertex list is known, Chebyshev center otherwise.
Point centroid(const ParamSet& params);

struct AffineBound {
  std::vector<double> zeta;  // n slopes followed by the intercept
  double delta_lower = 0.0;
  double delta_upper = 0.0;

  /// zeta . (y, 1)
  double median(std::span<const double> y) const;
  double lower(std::span<const double> y) const { return median(y) - delta_lower; }
  double upper(std::span<const double> y) const { return median(y) + delta_upper; }
};

AffineBound fit_affine_bounds(const BernsteinForm& form, const ParamSet& params);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// [min_j min_p b_j(p), max_j max_p b_j(p)].
Interval range_enclosure(const BernsteinForm& form, const ParamSet& params);

}  // namespace polyreach
