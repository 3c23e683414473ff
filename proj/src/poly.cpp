#include "polyreach/poly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polyreach/combinatorics.hpp"

namespace polyreach {

namespace {

std::string dims(std::size_t a, std::size_t b) {
  std::ostringstream os;
  os << a << " vs " << b;
  return os.str();
}

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

void for_each_index_le(const MultiIndex& bound,
                       const std::function<void(const MultiIndex&)>& fn) {
  MultiIndex cur(bound.size(), 0);
  if (bound.empty()) {
    fn(cur);
    return;
  }
  while (true) {
    fn(cur);
    std::size_t k = bound.size();
    while (k > 0) {
      --k;
      if (cur[k] < bound[k]) {
        ++cur[k];
        break;
      }
      cur[k] = 0;
      if (k == 0) return;
    }
  }
}

std::vector<MultiIndex> indices_le(const MultiIndex& bound) {
  std::vector<MultiIndex> out;
  for_each_index_le(bound, [&](const MultiIndex& i) { out.push_back(i); });
  return out;
}

// ---------------------------------------------------------------------------
// AffineCoeff

double AffineCoeff::eval(std::span<const double> p) const {
  require(p.size() == grad.size(), ErrorKind::DimensionMismatch,
          "parameter vector length " + dims(p.size(), grad.size()));
  double v = constant;
  for (std::size_t j = 0; j < grad.size(); ++j) v += grad[j] * p[j];
  return v;
}

bool AffineCoeff::negligible(double tol) const {
  if (std::abs(constant) >= tol) return false;
  return std::all_of(grad.begin(), grad.end(),
                     [tol](double g) { return std::abs(g) < tol; });
}

bool AffineCoeff::has_params() const {
  return std::any_of(grad.begin(), grad.end(), [](double g) { return g != 0.0; });
}

AffineCoeff& AffineCoeff::operator+=(const AffineCoeff& o) {
  require(o.grad.size() == grad.size(), ErrorKind::DimensionMismatch,
          "coefficient parameter count " + dims(grad.size(), o.grad.size()));
  constant += o.constant;
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += o.grad[j];
  return *this;
}

AffineCoeff& AffineCoeff::operator*=(double s) {
  constant *= s;
  for (double& g : grad) g *= s;
  return *this;
}

// ---------------------------------------------------------------------------
// ParamPoly

ParamPoly::ParamPoly(std::size_t n_vars, std::size_t n_params)
    : n_vars_(n_vars), n_params_(n_params) {}

ParamPoly ParamPoly::constant(std::size_t n_vars, std::size_t n_params, double c) {
  ParamPoly p(n_vars, n_params);
  p.add_term(MultiIndex(n_vars, 0), AffineCoeff(n_params, c));
  return p;
}

ParamPoly ParamPoly::variable(std::size_t n_vars, std::size_t n_params, std::size_t k) {
  require(k < n_vars, ErrorKind::DimensionMismatch, "variable index out of range");
  ParamPoly p(n_vars, n_params);
  MultiIndex i(n_vars, 0);
  i[k] = 1;
  p.add_term(i, AffineCoeff(n_params, 1.0));
  return p;
}

ParamPoly ParamPoly::parameter(std::size_t n_vars, std::size_t n_params, std::size_t j) {
  require(j < n_params, ErrorKind::DimensionMismatch, "parameter index out of range");
  ParamPoly p(n_vars, n_params);
  AffineCoeff c(n_params);
  c.grad[j] = 1.0;
  p.add_term(MultiIndex(n_vars, 0), c);
  return p;
}

ParamPoly ParamPoly::monomial(std::size_t n_params, MultiIndex exps, double c) {
  ParamPoly p(exps.size(), n_params);
  p.add_term(exps, AffineCoeff(n_params, c));
  return p;
}

void ParamPoly::add_term(const MultiIndex& index, const AffineCoeff& coeff) {
  require(index.size() == n_vars_, ErrorKind::DimensionMismatch,
          "multi-index length " + dims(index.size(), n_vars_));
  require(coeff.grad.size() == n_params_, ErrorKind::DimensionMismatch,
          "coefficient parameter count " + dims(coeff.grad.size(), n_params_));
  for (int e : index) {
    require(e >= 0, ErrorKind::InvalidInput, "negative exponent");
  }
  for (double g : coeff.grad) {
    require(std::isfinite(g), ErrorKind::InvalidInput, "non-finite coefficient");
  }
  require(std::isfinite(coeff.constant), ErrorKind::InvalidInput, "non-finite coefficient");

  auto it = terms_.find(index);
  if (it == terms_.end()) {
    if (!coeff.negligible()) terms_.emplace(index, coeff);
    return;
  }
  it->second += coeff;
  if (it->second.negligible()) terms_.erase(it);
}

bool ParamPoly::has_params() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const auto& t) { return t.second.has_params(); });
}

MultiIndex ParamPoly::degree() const {
  MultiIndex d(n_vars_, 0);
  for (const auto& [i, c] : terms_) {
    for (std::size_t k = 0; k < n_vars_; ++k) d[k] = std::max(d[k], i[k]);
  }
  return d;
}

double ParamPoly::eval(std::span<const double> x, std::span<const double> p) const {
  require(x.size() == n_vars_, ErrorKind::DimensionMismatch,
          "state vector length " + dims(x.size(), n_vars_));
  require(p.size() == n_params_, ErrorKind::DimensionMismatch,
          "parameter vector length " + dims(p.size(), n_params_));
  double sum = 0.0;
  for (const auto& [i, c] : terms_) {
    double mono = 1.0;
    for (std::size_t k = 0; k < n_vars_; ++k) mono *= ipow(x[k], i[k]);
    sum += c.eval(p) * mono;
  }
  return sum;
}

AffineCoeff ParamPoly::eval_affine(std::span<const double> x) const {
  require(x.size() == n_vars_, ErrorKind::DimensionMismatch,
          "state vector length " + dims(x.size(), n_vars_));
  AffineCoeff out(n_params_);
  for (const auto& [i, c] : terms_) {
    double mono = 1.0;
    for (std::size_t k = 0; k < n_vars_; ++k) mono *= ipow(x[k], i[k]);
    out += c * mono;
  }
  return out;
}

void ParamPoly::check_same_shape(const ParamPoly& o) const {
  require(n_vars_ == o.n_vars_ && n_params_ == o.n_params_,
          ErrorKind::DimensionMismatch, "polynomial shapes differ");
}

ParamPoly& ParamPoly::operator+=(const ParamPoly& o) {
  check_same_shape(o);
  for (const auto& [i, c] : o.terms_) add_term(i, c);
  return *this;
}

ParamPoly& ParamPoly::operator-=(const ParamPoly& o) {
  check_same_shape(o);
  for (const auto& [i, c] : o.terms_) add_term(i, c * -1.0);
  return *this;
}

ParamPoly& ParamPoly::operator*=(double s) {
  TermMap scaled;
  for (auto& [i, c] : terms_) {
    AffineCoeff nc = c * s;
    if (!nc.negligible()) scaled.emplace(i, std::move(nc));
  }
  terms_ = std::move(scaled);
  return *this;
}

ParamPoly operator*(const ParamPoly& a, const ParamPoly& b) {
  a.check_same_shape(b);
  const bool ap = a.has_params();
  const bool bp = b.has_params();
  require(!(ap && bp), ErrorKind::InvalidInput,
          "product of two parameter-dependent polynomials is not affine in the parameters");
  const ParamPoly& scalar_side = ap ? b : a;  // parameter-free factor
  const ParamPoly& coeff_side = ap ? a : b;
  ParamPoly out(a.n_vars(), a.n_params());
  for (const auto& [i, ci] : coeff_side.terms()) {
    for (const auto& [j, cj] : scalar_side.terms()) {
      MultiIndex k(i.size());
      for (std::size_t t = 0; t < i.size(); ++t) k[t] = i[t] + j[t];
      out.add_term(k, ci * cj.constant);
    }
  }
  return out;
}

bool ParamPoly::operator==(const ParamPoly& o) const {
  if (n_vars_ != o.n_vars_ || n_params_ != o.n_params_) return false;
  if (terms_.size() != o.terms_.size()) return false;
  for (auto a = terms_.begin(), b = o.terms_.begin(); a != terms_.end(); ++a, ++b) {
    if (a->first != b->first) return false;
    if (a->second.constant != b->second.constant) return false;
    if (a->second.grad != b->second.grad) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

void check_poly_vector(const PolyVector& v) {
  require(!v.empty(), ErrorKind::InvalidInput, "empty polynomial vector");
  for (const auto& p : v) {
    require(p.n_vars() == v.front().n_vars() && p.n_params() == v.front().n_params(),
            ErrorKind::DimensionMismatch, "polynomial vector components disagree in shape");
  }
}

std::vector<double> eval(const PolyVector& v, std::span<const double> x,
                         std::span<const double> p) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& poly : v) out.push_back(poly.eval(x, p));
  return out;
}

std::vector<double> AffineMap::apply(std::span<const double> y) const {
  require(y.size() == dim(), ErrorKind::DimensionMismatch, "affine map dimension");
  std::vector<double> x(dim());
  for (std::size_t k = 0; k < dim(); ++k) x[k] = scale[k] * y[k] + offset[k];
  return x;
}

AffineMap AffineMap::identity(std::size_t n) {
  return AffineMap{std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
}

ParamPoly compose_box(const ParamPoly& poly, const AffineMap& map) {
  const std::size_t n = poly.n_vars();
  require(map.dim() == n && map.offset.size() == n, ErrorKind::DimensionMismatch,
          "affine map dimension " + dims(map.dim(), n));
  ParamPoly out(n, poly.n_params());
  // (scale*y + offset)^e = sum_j C(e,j) scale^j offset^(e-j) y^j, per axis
  for (const auto& [i, c] : poly.terms()) {
    for_each_index_le(i, [&](const MultiIndex& j) {
      double w = 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        w *= static_cast<double>(binomial(i[k], j[k])) * ipow(map.scale[k], j[k]) *
             ipow(map.offset[k], i[k] - j[k]);
      }
      if (w != 0.0) out.add_term(j, c * w);
    });
  }
  return out;
}

ParamPoly linear_combination(const PolyVector& polys, std::span<const double> weights) {
  check_poly_vector(polys);
  require(weights.size() == polys.size(), ErrorKind::DimensionMismatch,
          "weight count " + dims(weights.size(), polys.size()));
  ParamPoly out(polys.front().n_vars(), polys.front().n_params());
  for (std::size_t k = 0; k < polys.size(); ++k) {
    if (weights[k] == 0.0) continue;
    for (const auto& [i, c] : polys[k].terms()) out.add_term(i, c * weights[k]);
  }
  return out;
}

bool is_multiaffine(const ParamPoly& poly, bool /*include_params*/) {
  for (const auto& [i, c] : poly.terms()) {
    for (int e : i) {
      if (e > 1) return false;
    }
  }
  return true;
}

bool is_multiaffine(const PolyVector& polys, bool include_params) {
  return std::all_of(polys.begin(), polys.end(),
                     [&](const ParamPoly& p) { return is_multiaffine(p, include_params); });
}

PolyVector euler_discretize(const PolyVector& field, double h) {
  check_poly_vector(field);
  require(h > 0.0 && std::isfinite(h), ErrorKind::InvalidInput, "Euler step must be positive");
  const std::size_t n = field.front().n_vars();
  require(field.size() == n, ErrorKind::DimensionMismatch,
          "vector field must have one component per state variable");
  const std::size_t m = field.front().n_params();
  PolyVector out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(ParamPoly::variable(n, m, k) + field[k] * h);
  }
  return out;
}

double Blossom::eval(const std::vector<std::vector<double>>& args,
                     std::span<const double> p) const {
  require(args.size() == copies, ErrorKind::DimensionMismatch, "blossom argument count");
  std::vector<double> flat;
  flat.reserve(n * copies);
  for (const auto& a : args) {
    require(a.size() == n, ErrorKind::DimensionMismatch, "blossom argument dimension");
    flat.insert(flat.end(), a.begin(), a.end());
  }
  return poly.eval(flat, p);
}

Blossom blossom(const ParamPoly& poly, int copies) {
  const std::size_t n = poly.n_vars();
  require(copies >= 1, ErrorKind::InvalidInput, "blossom needs at least one copy");
  for (int dk : poly.degree()) {
    require(dk <= copies, ErrorKind::InvalidInput,
            "blossom copy count is smaller than the polynomial degree");
  }
  const auto d = static_cast<std::size_t>(copies);
  Blossom out{ParamPoly(n * d, poly.n_params()), n, d};

  for (const auto& [i, c] : poly.terms()) {
    // x_k^e -> mean over e-subsets S of the copies of prod_{s in S} x_{s,k}
    std::vector<std::vector<std::vector<int>>> per_axis(n);
    double weight = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      per_axis[k] = subsets_of_size(copies, i[k]);
      weight /= static_cast<double>(per_axis[k].size());
    }
    MultiIndex choice_bound(n);
    for (std::size_t k = 0; k < n; ++k) {
      choice_bound[k] = static_cast<int>(per_axis[k].size()) - 1;
    }
    for_each_index_le(choice_bound, [&](const MultiIndex& choice) {
      MultiIndex idx(n * d, 0);
      for (std::size_t k = 0; k < n; ++k) {
        for (int s : per_axis[k][static_cast<std::size_t>(choice[k])]) {
          idx[static_cast<std::size_t>(s) * n + k] = 1;
        }
      }
      out.poly.add_term(idx, c * weight);
    });
  }
  return out;
}

}  // namespace polyreach
