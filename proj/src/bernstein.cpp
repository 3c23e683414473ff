#include "polyreach/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polyreach/combinatorics.hpp"

namespace polyreach {

const AffineCoeff& BernsteinForm::at(const MultiIndex& i) const {
  require(i.size() == degree.size(), ErrorKind::DimensionMismatch, "multi-index length");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < degree.size(); ++k) {
    require(i[k] >= 0 && i[k] <= degree[k], ErrorKind::InvalidInput, "multi-index outside degree");
    flat = flat * static_cast<std::size_t>(degree[k] + 1) + static_cast<std::size_t>(i[k]);
  }
  return coeffs[flat];
}

BernsteinForm bernstein_coefficients(const ParamPoly& poly) {
  BernsteinForm form;
  form.degree = poly.degree();
  form.n_params = poly.n_params();
  for (std::size_t k = 0; k < form.degree.size(); ++k) {
    if (form.degree[k] > kBernsteinDegreeCap) {
      fail(ErrorKind::ResourceLimit, "degree " + std::to_string(form.degree[k]) + " on axis " +
                                         std::to_string(k) + " exceeds the Bernstein cap");
    }
  }
  form.indices = indices_le(form.degree);
  form.coeffs.assign(form.indices.size(), AffineCoeff(form.n_params));

  const std::size_t n = form.degree.size();
  // Strides of the flat index, last axis fastest.
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t k = n; k-- > 1;) stride[k - 1] = stride[k] * static_cast<std::size_t>(form.degree[k] + 1);

  for (const auto& [j, a] : poly.terms()) {
    // Every i with j <= i <= d receives prod_k C(i_k, j_k) / C(d_k, j_k) a_j.
    MultiIndex span(n);
    for (std::size_t k = 0; k < n; ++k) span[k] = form.degree[k] - j[k];
    for_each_index_le(span, [&](const MultiIndex& off) {
      double w = 1.0;
      std::size_t flat = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const int ik = j[k] + off[k];
        w *= static_cast<double>(binomial(ik, j[k])) / static_cast<double>(binomial(form.degree[k], j[k]));
        flat += static_cast<std::size_t>(ik) * stride[k];
      }
      form.coeffs[flat] += a * w;
    });
  }
  return form;
}

Matrix control_matrix(const MultiIndex& degree) {
  Matrix a;
  for_each_index_le(degree, [&](const MultiIndex& i) {
    std::vector<double> row(degree.size() + 1, 1.0);
    for (std::size_t k = 0; k < degree.size(); ++k) {
      row[k] = degree[k] == 0 ? 0.0 : static_cast<double>(i[k]) / degree[k];
    }
    a.push_back(std::move(row));
  });
  return a;
}

Point centroid(const ParamSet& params) {
  const std::size_t m = params.dim();
  if (params.is_box()) return params.box()->center();
  if (!params.vertices().empty()) {
    Point c(m, 0.0);
    for (const auto& v : params.vertices()) {
      for (std::size_t j = 0; j < m; ++j) c[j] += v[j];
    }
    for (double& v : c) v /= static_cast<double>(params.vertices().size());
    return c;
  }
  // Chebyshev center: max r subject to H_i p + |H_i| r <= c_i.
  const auto& poly = params.polyhedron();
  LinearProgram lp(m + 1);
  for (std::size_t i = 0; i < poly.rows(); ++i) {
    std::vector<double> row = poly.h()[i];
    double norm = 0.0;
    for (double v : row) norm += v * v;
    row.push_back(std::sqrt(norm));
    lp.add_le(std::move(row), poly.c()[i]);
  }
  std::vector<double> obj(m + 1, 0.0);
  obj[m] = 1.0;
  lp.set_objective(obj);
  LpSolution s = lp_solve(lp);
  s.point.resize(m);
  return s.point;
}

double AffineBound::median(std::span<const double> y) const {
  require(y.size() + 1 == zeta.size(), ErrorKind::DimensionMismatch, "point dimension differs from bound");
  double v = zeta.back();
  for (std::size_t k = 0; k < y.size(); ++k) v += zeta[k] * y[k];
  return v;
}

AffineBound fit_affine_bounds(const BernsteinForm& form, const ParamSet& params) {
  require(form.n_params == params.dim(), ErrorKind::DimensionMismatch,
          "Bernstein form and parameter set disagree on the parameter count");
  const std::size_t n = form.degree.size();
  const Matrix a = control_matrix(form.degree);
  const Point pc = centroid(params);

  // Normal equations over the axes that actually vary plus the intercept.
  std::vector<std::size_t> cols;
  for (std::size_t k = 0; k < n; ++k) {
    if (form.degree[k] > 0) cols.push_back(k);
  }
  cols.push_back(n);
  const std::size_t q = cols.size();
  DenseLinearSystem sys;
  sys.matrix.assign(q, std::vector<double>(q, 0.0));
  sys.rhs.assign(q, 0.0);
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double bj = form.coeffs[j].eval(pc);
    for (std::size_t r = 0; r < q; ++r) {
      for (std::size_t c = 0; c < q; ++c) sys.matrix[r][c] += a[j][cols[r]] * a[j][cols[c]];
      sys.rhs[r] += a[j][cols[r]] * bj;
    }
  }
  const std::vector<double> sol = solve_dense(sys);

  AffineBound bound;
  bound.zeta.assign(n + 1, 0.0);
  for (std::size_t r = 0; r < q; ++r) bound.zeta[cols[r]] = sol[r];

  double lo = -std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < a.size(); ++j) {
    double med = bound.zeta[n];
    for (std::size_t k = 0; k < n; ++k) med += bound.zeta[k] * a[j][k];
    const AffineCoeff& b = form.coeffs[j];
    lo = std::max(lo, med + max_affine(b * -1.0, params));
    hi = std::max(hi, max_affine(b, params) - med);
  }
  bound.delta_lower = lo;
  bound.delta_upper = hi;
  return bound;
}

Interval range_enclosure(const BernsteinForm& form, const ParamSet& params) {
  require(form.n_params == params.dim(), ErrorKind::DimensionMismatch,
          "Bernstein form and parameter set disagree on the parameter count");
  Interval r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& b : form.coeffs) {
    r.lo = std::min(r.lo, -max_affine(b * -1.0, params));
    r.hi = std::max(r.hi, max_affine(b, params));
  }
  return r;
}

}  // namespace polyreach
