#include "polyreach/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace polyreach {

std::vector<double> solve_dense(const DenseLinearSystem& sys) {
  const std::size_t k = sys.matrix.size();
  require(sys.rhs.size() == k, ErrorKind::DimensionMismatch, "rhs length differs from matrix size");
  for (const auto& row : sys.matrix) {
    require(row.size() == k, ErrorKind::DimensionMismatch, "matrix is not square");
    for (double v : row) require(std::isfinite(v), ErrorKind::InvalidInput, "non-finite matrix entry");
  }
  for (double v : sys.rhs) require(std::isfinite(v), ErrorKind::InvalidInput, "non-finite rhs entry");

  Matrix a = sys.matrix;
  std::vector<double> b = sys.rhs;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < kPivotFloor) {
      fail(ErrorKind::SingularSystem,
           "pivot below 1e-12 in column " + std::to_string(col));
    }
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < k; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < k; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(k, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < k; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

// ---------------------------------------------------------------------------

LinearProgram::LinearProgram(std::size_t n_vars, Sense sense)
    : n_(n_vars), sense_(sense), objective_(n_vars, 0.0) {}

void LinearProgram::set_objective(std::vector<double> c) {
  require(c.size() == n_, ErrorKind::DimensionMismatch, "objective length");
  objective_ = std::move(c);
}

void LinearProgram::add_le(std::vector<double> row, double rhs) {
  require(row.size() == n_, ErrorKind::DimensionMismatch, "constraint row length");
  require(std::isfinite(rhs), ErrorKind::InvalidInput, "non-finite constraint rhs");
  rows_.push_back(std::move(row));
  rhs_.push_back(rhs);
}

void LinearProgram::add_ge(std::vector<double> row, double rhs) {
  for (double& v : row) v = -v;
  add_le(std::move(row), -rhs);
}

void LinearProgram::add_eq(const std::vector<double>& row, double rhs) {
  add_le(row, rhs);
  add_ge(row, rhs);
}

void LinearProgram::add_bounds(std::size_t k, double lower, double upper) {
  require(k < n_, ErrorKind::DimensionMismatch, "bound variable index");
  std::vector<double> e(n_, 0.0);
  e[k] = 1.0;
  add_le(e, upper);
  add_ge(e, lower);
}

namespace {

constexpr double kPivotEps = 1e-10;
constexpr std::size_t kMaxIterations = 200000;

// Dense tableau in canonical form. Row `m` is the reduced-cost row whose last
// entry holds minus the current objective value.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (n_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  double& cost(std::size_t c) { return at(m_, c); }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    basis_[r] = c;
  }

  // Replaces the cost row with `c` expressed in the current basis.
  void load_cost(const std::vector<double>& c) {
    for (std::size_t j = 0; j <= n_; ++j) cost(j) = j < n_ ? c[j] : 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = c[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) cost(j) -= cb * at(r, j);
    }
  }

  void drop_row(std::size_t r) {
    std::vector<double> nt;
    nt.reserve(m_ * (n_ + 1));
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      for (std::size_t j = 0; j <= n_; ++j) nt.push_back(at(i, j));
    }
    t_ = std::move(nt);
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    --m_;
  }

  // Minimises the cost row over columns [0, allowed). Bland's rule.
  enum class Outcome { Optimal, Unbounded };
  Outcome minimise(std::size_t allowed, double cost_eps) {
    for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (cost(j) < -cost_eps) {
          enter = j;
          break;
        }
      }
      if (enter == allowed) return Outcome::Optimal;

      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = at(r, enter);
        if (a <= kPivotEps) continue;
        const double ratio = std::max(0.0, rhs(r)) / a;
        if (leave == m_) {
          best = ratio;
          leave = r;
          continue;
        }
        const double tie = 1e-12 * (1.0 + best);
        if (ratio < best - tie || (ratio <= best + tie && basis_[r] < basis_[leave])) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave == m_) return Outcome::Unbounded;
      pivot(leave, enter);
    }
    fail(ErrorKind::ResourceLimit, "simplex iteration limit reached");
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace

LpSolution lp_solve(const LinearProgram& lp) {
  const std::size_t n = lp.n_vars();
  const std::size_t m = lp.rows().size();

  // Columns: x+ (n), x- (n), slacks (m), artificials (one per negative rhs).
  std::vector<std::size_t> art_rows;
  for (std::size_t r = 0; r < m; ++r) {
    if (lp.rhs()[r] < 0.0) art_rows.push_back(r);
  }
  const std::size_t n_struct = 2 * n + m;
  const std::size_t n_cols = n_struct + art_rows.size();
  Tableau tab(m, n_cols);

  double rhs_scale = 1.0;
  for (std::size_t r = 0; r < m; ++r) rhs_scale = std::max(rhs_scale, std::abs(lp.rhs()[r]));

  std::size_t next_art = n_struct;
  for (std::size_t r = 0; r < m; ++r) {
    const double sign = lp.rhs()[r] < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      tab.at(r, k) = sign * lp.rows()[r][k];
      tab.at(r, n + k) = -sign * lp.rows()[r][k];
    }
    tab.at(r, 2 * n + r) = sign;
    tab.rhs(r) = sign * lp.rhs()[r];
    if (sign < 0.0) {
      tab.at(r, next_art) = 1.0;
      tab.basis()[r] = next_art++;
    } else {
      tab.basis()[r] = 2 * n + r;
    }
  }

  if (!art_rows.empty()) {
    std::vector<double> c1(n_cols, 0.0);
    for (std::size_t j = n_struct; j < n_cols; ++j) c1[j] = 1.0;
    tab.load_cost(c1);
    tab.minimise(n_cols, 1e-11);
    const double infeas = -tab.cost(n_cols);
    if (infeas > 1e-9 * rhs_scale) {
      fail(ErrorKind::Infeasible, "linear program is infeasible");
    }
    // Drive remaining artificials out of the basis; drop redundant rows.
    for (std::size_t r = tab.rows(); r-- > 0;) {
      if (tab.basis()[r] < n_struct) continue;
      std::size_t col = n_struct;
      for (std::size_t j = 0; j < n_struct; ++j) {
        if (std::abs(tab.at(r, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col < n_struct) {
        tab.pivot(r, col);
      } else {
        tab.drop_row(r);
      }
    }
  }

  const double dir = lp.sense() == Sense::Maximize ? -1.0 : 1.0;
  std::vector<double> c2(n_cols, 0.0);
  double cscale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    c2[k] = dir * lp.objective()[k];
    c2[n + k] = -dir * lp.objective()[k];
    cscale = std::max(cscale, std::abs(lp.objective()[k]));
  }
  tab.load_cost(c2);
  if (tab.minimise(n_struct, 1e-11 * (1.0 + cscale)) == Tableau::Outcome::Unbounded) {
    fail(ErrorKind::Unbounded, "linear program is unbounded");
  }

  std::vector<double> z(n_cols, 0.0);
  for (std::size_t r = 0; r < tab.rows(); ++r) z[tab.basis()[r]] = tab.rhs(r);
  LpSolution sol;
  sol.point.resize(n);
  for (std::size_t k = 0; k < n; ++k) sol.point[k] = z[k] - z[n + k];
  for (std::size_t k = 0; k < n; ++k) sol.value += lp.objective()[k] * sol.point[k];
  return sol;
}

}  // namespace polyreach
