#pragma once

// Parametric multivariate polynomials in the power basis.
//
// A ParamPoly is sum_i a_i(p) x^i where every coefficient a_i is an affine
// function of the parameter vector p. The affine restriction is structural:
// there is no way to build a term that is nonlinear in p, and products of two
// parameter-dependent polynomials are rejected.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "polyreach/error.hpp"

namespace polyreach {

/// Exponent vector (i_1, ..., i_n). Ordered lexicographically.
using MultiIndex = std::vector<int>;

/// Coefficients smaller than this (in every field) are not stored.
inline constexpr double kDropTolerance = 1e-14;

/// Calls `fn(i)` for every multi-index i <= bound, lexicographic order with
/// the last axis varying fastest.
void for_each_index_le(const MultiIndex& bound,
                       const std::function<void(const MultiIndex&)>& fn);

/// All multi-indices i <= bound in the order used by for_each_index_le.
std::vector<MultiIndex> indices_le(const MultiIndex& bound);

/// constant + grad . p
struct AffineCoeff {
  double constant = 0.0;
  std::vector<double> grad;

  AffineCoeff() = default;
  explicit AffineCoeff(std::size_t n_params, double c = 0.0)
      : constant(c), grad(n_params, 0.0) {}
  AffineCoeff(double c, std::vector<double> g)
      : constant(c), grad(std::move(g)) {}

  double eval(std::span<const double> p) const;
  bool negligible(double tol = kDropTolerance) const;
  bool has_params() const;

  AffineCoeff& operator+=(const AffineCoeff& o);
  AffineCoeff& operator*=(double s);
  friend AffineCoeff operator+(AffineCoeff a, const AffineCoeff& b) { return a += b; }
  friend AffineCoeff operator*(AffineCoeff a, double s) { return a *= s; }
  friend AffineCoeff operator*(double s, AffineCoeff a) { return a *= s; }
};

class ParamPoly {
 public:
  using TermMap = std::map<MultiIndex, AffineCoeff>;

  ParamPoly() = default;
  ParamPoly(std::size_t n_vars, std::size_t n_params);

  static ParamPoly constant(std::size_t n_vars, std::size_t n_params, double c);
  /// The monomial x_k.
  static ParamPoly variable(std::size_t n_vars, std::size_t n_params, std::size_t k);
  /// The parameter p_j as a degree-0 polynomial.
  static ParamPoly parameter(std::size_t n_vars, std::size_t n_params, std::size_t j);
  /// c * x^exps with a parameter-free coefficient.
  static ParamPoly monomial(std::size_t n_params, MultiIndex exps, double c);

  /// Adds `coeff * x^index` merging with an existing term.
  void add_term(const MultiIndex& index, const AffineCoeff& coeff);

  std::size_t n_vars() const { return n_vars_; }
  std::size_t n_params() const { return n_params_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool has_params() const;

  /// Componentwise maximum exponent; all zeros for the zero polynomial.
  MultiIndex degree() const;

  double eval(std::span<const double> x, std::span<const double> p) const;
  /// Coefficient of the polynomial at fixed x, as an affine function of p.
  AffineCoeff eval_affine(std::span<const double> x) const;

  ParamPoly& operator+=(const ParamPoly& o);
  ParamPoly& operator-=(const ParamPoly& o);
  ParamPoly& operator*=(double s);
  friend ParamPoly operator+(ParamPoly a, const ParamPoly& b) { return a += b; }
  friend ParamPoly operator-(ParamPoly a, const ParamPoly& b) { return a -= b; }
  friend ParamPoly operator*(ParamPoly a, double s) { return a *= s; }
  friend ParamPoly operator*(double s, ParamPoly a) { return a *= s; }
  ParamPoly operator-() const { return *this * -1.0; }

  /// Polynomial product. At most one factor may depend on parameters.
  friend ParamPoly operator*(const ParamPoly& a, const ParamPoly& b);

  bool operator==(const ParamPoly& o) const;

 private:
  void check_same_shape(const ParamPoly& o) const;

  std::size_t n_vars_ = 0;
  std::size_t n_params_ = 0;
  TermMap terms_;
};

/// Vector of polynomials sharing n_vars and n_params (pi = (pi_1 .. pi_n)).
using PolyVector = std::vector<ParamPoly>;

void check_poly_vector(const PolyVector& v);
std::vector<double> eval(const PolyVector& v, std::span<const double> x,
                         std::span<const double> p);

/// x -> diag(scale) x + offset; maps the unit box onto an axis-aligned box.
struct AffineMap {
  std::vector<double> scale;
  std::vector<double> offset;

  std::size_t dim() const { return scale.size(); }
  std::vector<double> apply(std::span<const double> y) const;
  static AffineMap identity(std::size_t n);
};

/// gamma(y, p) = poly(map(y), p).
ParamPoly compose_box(const ParamPoly& poly, const AffineMap& map);

/// sum_k weights[k] * polys[k].
ParamPoly linear_combination(const PolyVector& polys, std::span<const double> weights);

/// True iff every state exponent is <= 1. Coefficients are affine in p, so
/// the joint (x, p) check reduces to the same condition; the flag is kept for
/// callers that want to state which property they rely on.
bool is_multiaffine(const ParamPoly& poly, bool include_params);
bool is_multiaffine(const PolyVector& polys, bool include_params);

/// Component k becomes x_k + h * field_k(x, p).
PolyVector euler_discretize(const PolyVector& field, double h);

/// Symmetric multi-affine blossom of a polynomial with `copies` argument
/// copies. Variable (copy c, axis k) is stored at index c * n + k.
struct Blossom {
  ParamPoly poly;
  std::size_t n = 0;
  std::size_t copies = 0;

  /// `args` holds `copies` points of dimension n.
  double eval(const std::vector<std::vector<double>>& args,
              std::span<const double> p) const;
};

Blossom blossom(const ParamPoly& poly, int copies);

}  // namespace polyreach
