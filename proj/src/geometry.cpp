#include "polyreach/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polyreach/combinatorics.hpp"

namespace polyreach {

// ---------------------------------------------------------------------------
// Box

Box::Box(std::vector<double> lo, std::vector<double> hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  require(lower.size() == upper.size(), ErrorKind::DimensionMismatch, "box bound lengths differ");
  for (std::size_t k = 0; k < lower.size(); ++k) {
    require(std::isfinite(lower[k]) && std::isfinite(upper[k]), ErrorKind::InvalidInput,
            "non-finite box bound");
    require(lower[k] <= upper[k], ErrorKind::InvalidInput,
            "box lower bound exceeds upper bound on axis " + std::to_string(k));
  }
}

Box Box::unit(std::size_t n) { return Box(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)); }

Box Box::point(const Point& x) { return Box(x, x); }

Point Box::center() const {
  Point c(dim());
  for (std::size_t k = 0; k < dim(); ++k) c[k] = 0.5 * (lower[k] + upper[k]);
  return c;
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < dim(); ++k) v *= width(k);
  return v;
}

bool Box::contains(std::span<const double> x, double tol) const {
  require(x.size() == dim(), ErrorKind::DimensionMismatch, "point dimension differs from box");
  for (std::size_t k = 0; k < dim(); ++k) {
    if (x[k] < lower[k] - tol || x[k] > upper[k] + tol) return false;
  }
  return true;
}

bool Box::contains(const Box& other, double tol) const {
  require(other.dim() == dim(), ErrorKind::DimensionMismatch, "box dimensions differ");
  for (std::size_t k = 0; k < dim(); ++k) {
    if (other.lower[k] < lower[k] - tol || other.upper[k] > upper[k] + tol) return false;
  }
  return true;
}

Box Box::inflated(double eps) const {
  Box b = *this;
  for (std::size_t k = 0; k < dim(); ++k) {
    b.lower[k] -= eps;
    b.upper[k] += eps;
  }
  return b;
}

Box Box::translated(std::span<const double> shift) const {
  require(shift.size() == dim(), ErrorKind::DimensionMismatch, "shift dimension");
  Box b = *this;
  for (std::size_t k = 0; k < dim(); ++k) {
    b.lower[k] += shift[k];
    b.upper[k] += shift[k];
  }
  return b;
}

Matrix box_template(std::size_t n) {
  Matrix h;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> row(n, 0.0);
    row[k] = 1.0;
    h.push_back(row);
    row[k] = -1.0;
    h.push_back(row);
  }
  return h;
}

Matrix octagon_template(std::size_t n) {
  Matrix h = box_template(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      for (double sj : {1.0, -1.0}) {
        for (double sk : {1.0, -1.0}) {
          std::vector<double> row(n, 0.0);
          row[j] = sj;
          row[k] = sk;
          h.push_back(row);
        }
      }
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// TemplatePolyhedron

TemplatePolyhedron::TemplatePolyhedron(Matrix h, std::vector<double> c)
    : h_(std::move(h)), c_(std::move(c)) {
  require(h_.size() == c_.size(), ErrorKind::DimensionMismatch,
          "template row count differs from coefficient count");
  require(!h_.empty(), ErrorKind::InvalidInput,
          "template polyhedron needs at least one row (use universe(n))");
  n_ = h_.front().size();
  for (std::size_t i = 0; i < h_.size(); ++i) {
    require(h_[i].size() == n_, ErrorKind::DimensionMismatch, "ragged template matrix");
    require(std::any_of(h_[i].begin(), h_[i].end(), [](double v) { return v != 0.0; }),
            ErrorKind::InvalidInput, "template row " + std::to_string(i) + " is all zero");
    for (double v : h_[i]) require(std::isfinite(v), ErrorKind::InvalidInput, "non-finite template entry");
    require(std::isfinite(c_[i]), ErrorKind::InvalidInput, "non-finite template coefficient");
  }
}

TemplatePolyhedron TemplatePolyhedron::from_box(const Box& b) {
  return from_box(b, box_template(b.dim()));
}

TemplatePolyhedron TemplatePolyhedron::from_box(const Box& b, const Matrix& h) {
  std::vector<double> c;
  c.reserve(h.size());
  for (const auto& row : h) {
    require(row.size() == b.dim(), ErrorKind::DimensionMismatch, "template width differs from box");
    double s = 0.0;
    for (std::size_t k = 0; k < b.dim(); ++k) s += row[k] * (row[k] >= 0.0 ? b.upper[k] : b.lower[k]);
    c.push_back(s);
  }
  return TemplatePolyhedron(h, std::move(c));
}

TemplatePolyhedron TemplatePolyhedron::universe(std::size_t n) {
  TemplatePolyhedron p;
  p.n_ = n;
  return p;
}

bool TemplatePolyhedron::contains(std::span<const double> x, double tol) const {
  require(x.size() == n_, ErrorKind::DimensionMismatch, "point dimension differs from polyhedron");
  for (std::size_t i = 0; i < h_.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < n_; ++k) s += h_[i][k] * x[k];
    if (s > c_[i] + tol) return false;
  }
  return true;
}

TemplatePolyhedron TemplatePolyhedron::intersect(const TemplatePolyhedron& o) const {
  require(o.n_ == n_, ErrorKind::DimensionMismatch, "polyhedron dimensions differ");
  if (o.h_.empty()) return *this;
  if (h_.empty()) return o;
  Matrix h = h_;
  std::vector<double> c = c_;
  h.insert(h.end(), o.h_.begin(), o.h_.end());
  c.insert(c.end(), o.c_.begin(), o.c_.end());
  return TemplatePolyhedron(std::move(h), std::move(c));
}

TemplatePolyhedron TemplatePolyhedron::translated(std::span<const double> shift) const {
  require(shift.size() == n_, ErrorKind::DimensionMismatch, "shift dimension");
  TemplatePolyhedron p = *this;
  for (std::size_t i = 0; i < h_.size(); ++i) {
    for (std::size_t k = 0; k < n_; ++k) p.c_[i] += h_[i][k] * shift[k];
  }
  return p;
}

std::optional<Box> TemplatePolyhedron::as_box() const {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo(n_, -inf);
  std::vector<double> hi(n_, inf);
  for (std::size_t i = 0; i < h_.size(); ++i) {
    std::size_t axis = n_;
    for (std::size_t k = 0; k < n_; ++k) {
      if (h_[i][k] == 0.0) continue;
      if (axis != n_) return std::nullopt;
      axis = k;
    }
    const double a = h_[i][axis];
    const double bound = c_[i] / a;
    if (a > 0.0) {
      hi[axis] = std::min(hi[axis], bound);
    } else {
      lo[axis] = std::max(lo[axis], bound);
    }
  }
  for (std::size_t k = 0; k < n_; ++k) {
    if (!std::isfinite(lo[k]) || !std::isfinite(hi[k])) return std::nullopt;
    if (lo[k] > hi[k]) {
      // Round-off can cross degenerate faces by a few ulps.
      const double gap = lo[k] - hi[k];
      if (gap > 1e-12 * (1.0 + std::abs(lo[k]))) fail(ErrorKind::EmptySet, "box-shaped polyhedron is empty");
      lo[k] = hi[k] = 0.5 * (lo[k] + hi[k]);
    }
  }
  return Box(std::move(lo), std::move(hi));
}

namespace {

LinearProgram lp_over(const TemplatePolyhedron& poly) {
  LinearProgram lp(poly.dim());
  for (std::size_t i = 0; i < poly.rows(); ++i) lp.add_le(poly.h()[i], poly.c()[i]);
  return lp;
}

double box_support(const Box& b, std::span<const double> d) {
  double s = 0.0;
  for (std::size_t k = 0; k < b.dim(); ++k) s += d[k] * (d[k] >= 0.0 ? b.upper[k] : b.lower[k]);
  return s;
}

}  // namespace

bool is_empty(const TemplatePolyhedron& poly) {
  if (poly.rows() == 0) return false;
  try {
    if (poly.as_box()) return false;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EmptySet) return true;
    throw;
  }
  LinearProgram lp = lp_over(poly);
  try {
    lp_solve(lp);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Infeasible) return true;
    throw;
  }
  return false;
}

double support(const TemplatePolyhedron& poly, std::span<const double> direction) {
  require(direction.size() == poly.dim(), ErrorKind::DimensionMismatch, "direction dimension");
  std::optional<Box> box;
  try {
    box = poly.as_box();
  } catch (const Error&) {
    fail(ErrorKind::EmptySet, "support of an empty polyhedron");
  }
  if (box) return box_support(*box, direction);
  LinearProgram lp = lp_over(poly);
  lp.set_objective(std::vector<double>(direction.begin(), direction.end()));
  try {
    return lp_solve(lp).value;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Infeasible) fail(ErrorKind::EmptySet, "support of an empty polyhedron");
    if (e.kind() == ErrorKind::Unbounded) fail(ErrorKind::UnboundedSet, "polyhedron is unbounded in the requested direction");
    throw;
  }
}

TemplatePolyhedron retemplate(const TemplatePolyhedron& poly, const Matrix& h) {
  std::vector<double> c;
  c.reserve(h.size());
  for (const auto& row : h) c.push_back(support(poly, row));
  return TemplatePolyhedron(h, std::move(c));
}

Box bounding_box(const TemplatePolyhedron& poly) {
  const std::size_t n = poly.dim();
  std::optional<Box> box;
  try {
    box = poly.as_box();
  } catch (const Error&) {
    fail(ErrorKind::EmptySet, "bounding box of an empty polyhedron");
  }
  if (box) return *box;
  std::vector<double> lo(n), hi(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> e(n, 0.0);
    e[k] = 1.0;
    hi[k] = support(poly, e);
    e[k] = -1.0;
    lo[k] = -support(poly, e);
    if (lo[k] > hi[k]) lo[k] = hi[k] = 0.5 * (lo[k] + hi[k]);
  }
  return Box(std::move(lo), std::move(hi));
}

AffineMap unit_to_box_map(const Box& b) {
  AffineMap m;
  m.scale.resize(b.dim());
  m.offset = b.lower;
  for (std::size_t k = 0; k < b.dim(); ++k) m.scale[k] = b.width(k);
  return m;
}

std::vector<Point> box_vertices(const Box& b, std::size_t dim_cap) {
  const std::size_t n = b.dim();
  if (n > dim_cap || n >= 63) {
    fail(ErrorKind::ResourceLimit,
         "box dimension " + std::to_string(n) + " exceeds vertex enumeration cap " + std::to_string(dim_cap));
  }
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<Point> out;
  out.reserve(count);
  for (std::uint64_t v = 0; v < count; ++v) {
    Point p(n);
    for (std::size_t k = 0; k < n; ++k) {
      const bool up = (v >> (n - 1 - k)) & 1U;
      p[k] = up ? b.upper[k] : b.lower[k];
    }
    out.push_back(std::move(p));
  }
  return out;
}

Box interval_hull(const std::vector<Point>& points) {
  require(!points.empty(), ErrorKind::InvalidInput, "interval hull of an empty point list");
  std::vector<double> lo = points.front();
  std::vector<double> hi = points.front();
  for (const auto& p : points) {
    require(p.size() == lo.size(), ErrorKind::DimensionMismatch, "point dimensions differ");
    for (std::size_t k = 0; k < p.size(); ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  return Box(std::move(lo), std::move(hi));
}

TemplatePolyhedron preimage_under_map(const TemplatePolyhedron& poly, const AffineMap& map) {
  const std::size_t n = poly.dim();
  require(map.dim() == n, ErrorKind::DimensionMismatch, "affine map dimension differs from polyhedron");
  Matrix h;
  std::vector<double> c;
  for (std::size_t i = 0; i < poly.rows(); ++i) {
    std::vector<double> row(n);
    double rhs = poly.c()[i];
    bool nonzero = false;
    for (std::size_t k = 0; k < n; ++k) {
      row[k] = poly.h()[i][k] * map.scale[k];
      rhs -= poly.h()[i][k] * map.offset[k];
      nonzero = nonzero || row[k] != 0.0;
    }
    if (nonzero) {
      h.push_back(std::move(row));
      c.push_back(rhs);
    } else if (rhs < -1e-9 * (1.0 + std::abs(poly.c()[i]))) {
      fail(ErrorKind::EmptySet, "preimage is empty: constant row violated");
    }
  }
  if (h.empty()) return TemplatePolyhedron::universe(n);
  return TemplatePolyhedron(std::move(h), std::move(c));
}

bool contains(const Box& set, std::span<const double> x, double tol) { return set.contains(x, tol); }

bool contains(const TemplatePolyhedron& set, std::span<const double> x, double tol) {
  return set.contains(x, tol);
}

std::optional<std::vector<Point>> enumerate_vertices(const TemplatePolyhedron& poly,
                                                     std::size_t max_subsets) {
  const std::size_t n = poly.dim();
  const std::size_t l = poly.rows();
  if (n == 0) return std::vector<Point>{Point{}};
  if (l < n) return std::nullopt;
  const std::uint64_t combos = binomial(static_cast<int>(l), static_cast<int>(n));
  if (combos == 0 || combos > max_subsets) return std::nullopt;

  double scale = 1.0;
  for (double v : poly.c()) scale = std::max(scale, std::abs(v));
  std::vector<Point> verts;
  for (const auto& subset : subsets_of_size(static_cast<int>(l), static_cast<int>(n))) {
    DenseLinearSystem sys;
    for (int r : subset) {
      sys.matrix.push_back(poly.h()[static_cast<std::size_t>(r)]);
      sys.rhs.push_back(poly.c()[static_cast<std::size_t>(r)]);
    }
    Point x;
    try {
      x = solve_dense(sys);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SingularSystem) continue;
      throw;
    }
    if (!poly.contains(x, 1e-9 * scale)) continue;
    const bool dup = std::any_of(verts.begin(), verts.end(), [&](const Point& v) {
      for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(v[k] - x[k]) > 1e-9 * scale) return false;
      }
      return true;
    });
    if (!dup) verts.push_back(std::move(x));
  }
  return verts;
}

std::vector<std::array<double, 2>> project_2d(const TemplatePolyhedron& poly, std::size_t a,
                                              std::size_t b) {
  const std::size_t n = poly.dim();
  require(a < n && b < n && a != b, ErrorKind::DimensionMismatch, "projection axes out of range");
  using P2 = std::array<double, 2>;

  auto extreme = [&](double da, double db) -> P2 {
    std::vector<double> d(n, 0.0);
    d[a] = da;
    d[b] = db;
    if (auto box = poly.as_box()) {
      return {da >= 0.0 ? box->upper[a] : box->lower[a], db >= 0.0 ? box->upper[b] : box->lower[b]};
    }
    LinearProgram lp = lp_over(poly);
    lp.set_objective(d);
    LpSolution s;
    try {
      s = lp_solve(lp);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Infeasible) fail(ErrorKind::EmptySet, "projection of an empty polyhedron");
      if (e.kind() == ErrorKind::Unbounded) fail(ErrorKind::UnboundedSet, "projection of an unbounded polyhedron");
      throw;
    }
    return {s.point[a], s.point[b]};
  };
  auto dot = [](const P2& n2, const P2& p) { return n2[0] * p[0] + n2[1] * p[1]; };

  Box bb = bounding_box(poly);
  const double scale = 1.0 + std::max({std::abs(bb.lower[a]), std::abs(bb.upper[a]),
                                       std::abs(bb.lower[b]), std::abs(bb.upper[b])});
  const double tol = 1e-9 * scale;

  // Start from the four axis extremes, then split every edge whose outward
  // normal still exposes a point beyond it.
  std::vector<P2> poly2 = {extreme(1, 0), extreme(0, 1), extreme(-1, 0), extreme(0, -1)};
  auto same = [&](const P2& p, const P2& q) {
    return std::abs(p[0] - q[0]) <= tol && std::abs(p[1] - q[1]) <= tol;
  };
  std::vector<P2> ring;
  for (const auto& p : poly2) {
    if (ring.empty() || !same(ring.back(), p)) ring.push_back(p);
  }
  while (ring.size() > 1 && same(ring.front(), ring.back())) ring.pop_back();

  for (std::size_t guard = 0; guard < 10000 && ring.size() >= 2; ++guard) {
    bool changed = false;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const P2 p = ring[i];
      const P2 q = ring[(i + 1) % ring.size()];
      const P2 normal = {q[1] - p[1], p[0] - q[0]};
      const double len = std::hypot(normal[0], normal[1]);
      if (len <= tol) continue;
      const P2 r = extreme(normal[0] / len, normal[1] / len);
      if (dot(normal, r) / len > dot(normal, p) / len + tol && !same(r, p) && !same(r, q)) {
        ring.insert(ring.begin() + static_cast<std::ptrdiff_t>(i + 1), r);
        changed = true;
        break;
      }
    }
    if (!changed) break;
  }
  return ring;
}

// ---------------------------------------------------------------------------
// ParamSet

ParamSet::ParamSet() : poly_(TemplatePolyhedron::universe(0)), box_(Box{}), vertices_{Point{}} {}

ParamSet::ParamSet(const Box& box)
    : poly_(box.dim() == 0 ? TemplatePolyhedron::universe(0) : TemplatePolyhedron::from_box(box)),
      box_(box),
      vertices_(box_vertices(box)) {
  std::sort(vertices_.begin(), vertices_.end());
  vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
}

ParamSet::ParamSet(TemplatePolyhedron poly) : poly_(std::move(poly)) {
  std::optional<Box> b;
  try {
    b = poly_.as_box();
  } catch (const Error&) {
    fail(ErrorKind::EmptySet, "parameter set is empty");
  }
  if (b) {
    *this = ParamSet(*b);
    return;
  }
  require(!is_empty(poly_), ErrorKind::EmptySet, "parameter set is empty");
  bounding_box(poly_);  // throws UnboundedSet
  if (auto v = enumerate_vertices(poly_)) vertices_ = std::move(*v);
}

double max_affine(const AffineCoeff& fn, const ParamSet& params) {
  require(fn.grad.size() == params.dim(), ErrorKind::DimensionMismatch,
          "affine function and parameter set dimensions differ");
  if (params.is_box()) {
    const Box& b = *params.box();
    double v = fn.constant;
    for (std::size_t j = 0; j < b.dim(); ++j) {
      v += fn.grad[j] * (fn.grad[j] >= 0.0 ? b.upper[j] : b.lower[j]);
    }
    return v;
  }
  if (!params.vertices().empty()) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : params.vertices()) best = std::max(best, fn.eval(p));
    return best;
  }
  return fn.constant + support(params.polyhedron(), fn.grad);
}

}  // namespace polyreach
