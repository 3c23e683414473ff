#pragma once

// Small dense numerical kernels: Gaussian elimination for the normal
// equations of the Bernstein fit, and a two-phase simplex for the LPs that
// bound template coefficients, bounding boxes and parameter shifts.

#include <cstddef>
#include <span>
#include <vector>

#include "polyreach/error.hpp"

namespace polyreach {

using Matrix = std::vector<std::vector<double>>;

struct DenseLinearSystem {
  Matrix matrix;
  std::vector<double> rhs;
};

/// Minimum admissible pivot magnitude in solve_dense.
inline constexpr double kPivotFloor = 1e-12;

/// Gaussian elimination with partial pivoting (largest magnitude, ties to the
/// lowest row). Throws SingularSystem when a pivot falls below kPivotFloor.
std::vector<double> solve_dense(const DenseLinearSystem& sys);

enum class Sense { Maximize, Minimize };

/// LP over free variables x in R^n. Every constraint is stored as a <= row;
/// add_ge and add_eq normalise at insertion.
class LinearProgram {
 public:
  explicit LinearProgram(std::size_t n_vars, Sense sense = Sense::Maximize);

  void set_objective(std::vector<double> c);
  void set_sense(Sense s) { sense_ = s; }
  void add_le(std::vector<double> row, double rhs);
  void add_ge(std::vector<double> row, double rhs);
  void add_eq(const std::vector<double>& row, double rhs);
  /// lower <= x_k <= upper
  void add_bounds(std::size_t k, double lower, double upper);

  std::size_t n_vars() const { return n_; }
  Sense sense() const { return sense_; }
  const std::vector<double>& objective() const { return objective_; }
  const Matrix& rows() const { return rows_; }
  const std::vector<double>& rhs() const { return rhs_; }

 private:
  std::size_t n_;
  Sense sense_;
  std::vector<double> objective_;
  Matrix rows_;
  std::vector<double> rhs_;
};

struct LpSolution {
  double value = 0.0;
  std::vector<double> point;
};

/// Two-phase dense simplex with Bland's rule. Deterministic.
/// Throws Infeasible or Unbounded.
LpSolution lp_solve(const LinearProgram& lp);

}  // namespace polyreach
