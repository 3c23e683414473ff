#pragma once

// Axis-aligned boxes, template polyhedra <H, c> = {x | H x <= c} and
// parameter sets, with the conversions the reachability engine needs.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "polyreach/numkernel.hpp"
#include "polyreach/poly.hpp"

namespace polyreach {

using Point = std::vector<double>;

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  Box() = default;
  Box(std::vector<double> lo, std::vector<double> hi);

  static Box unit(std::size_t n);
  static Box point(const Point& x);

  std::size_t dim() const { return lower.size(); }
  double width(std::size_t k) const { return upper[k] - lower[k]; }
  Point center() const;
  double volume() const;

  bool contains(std::span<const double> x, double tol = 0.0) const;
  /// this contains `other` inflated by nothing, with slack `tol` per face
  bool contains(const Box& other, double tol = 0.0) const;
  Box inflated(double eps) const;
  Box translated(std::span<const double> shift) const;

  bool operator==(const Box&) const = default;
};

/// Rows +e_k, -e_k for every axis.
Matrix box_template(std::size_t n);
/// Box rows plus +-e_j +- e_k for every pair j < k.
Matrix octagon_template(std::size_t n);

class TemplatePolyhedron {
 public:
  TemplatePolyhedron() = default;
  TemplatePolyhedron(Matrix h, std::vector<double> c);

  /// The box in its own box template.
  static TemplatePolyhedron from_box(const Box& b);
  /// Tightest <H, c> containing the box: c_i = max over the box of H^i x.
  static TemplatePolyhedron from_box(const Box& b, const Matrix& h);
  /// The whole space R^n (no rows).
  static TemplatePolyhedron universe(std::size_t n);

  std::size_t dim() const { return n_; }
  std::size_t rows() const { return h_.size(); }
  const Matrix& h() const { return h_; }
  const std::vector<double>& c() const { return c_; }

  bool contains(std::span<const double> x, double tol = 0.0) const;
  /// Conjunction of both row sets.
  TemplatePolyhedron intersect(const TemplatePolyhedron& o) const;
  TemplatePolyhedron translated(std::span<const double> shift) const;
  /// The box described by this polyhedron when every row is a signed
  /// multiple of a unit vector and every axis is bounded on both sides.
  std::optional<Box> as_box() const;

 private:
  std::size_t n_ = 0;
  Matrix h_;
  std::vector<double> c_;
};

bool is_empty(const TemplatePolyhedron& poly);

/// max d . x over the polyhedron. Throws EmptySet / UnboundedSet.
double support(const TemplatePolyhedron& poly, std::span<const double> direction);

/// Tightest <H, c> containing `poly` (c_i = support in direction H^i).
TemplatePolyhedron retemplate(const TemplatePolyhedron& poly, const Matrix& h);

/// Smallest box containing the polyhedron, by 2n LPs.
Box bounding_box(const TemplatePolyhedron& poly);

/// tau(y) = diag(upper - lower) y + lower.
AffineMap unit_to_box_map(const Box& b);

inline constexpr std::size_t kDefaultVertexDimCap = 20;

/// All 2^n corners; bit k of the enumeration counter selects upper on axis
/// n-1-k, so the order is binary counting with the last axis fastest.
std::vector<Point> box_vertices(const Box& b, std::size_t dim_cap = kDefaultVertexDimCap);

/// Componentwise min / max.
Box interval_hull(const std::vector<Point>& points);

/// {y | H diag(scale) y <= c - H offset}. Rows that vanish are dropped after
/// checking their constant constraint.
TemplatePolyhedron preimage_under_map(const TemplatePolyhedron& poly, const AffineMap& map);

bool contains(const Box& set, std::span<const double> x, double tol);
bool contains(const TemplatePolyhedron& set, std::span<const double> x, double tol);

/// Vertices of a bounded polyhedron by enumerating n-row subsets. Returns
/// nullopt when the number of subsets exceeds `max_subsets`.
std::optional<std::vector<Point>> enumerate_vertices(const TemplatePolyhedron& poly,
                                                     std::size_t max_subsets = 20000);

/// Exact projection onto axes (a, b) as a counter-clockwise polygon.
std::vector<std::array<double, 2>> project_2d(const TemplatePolyhedron& poly,
                                              std::size_t a, std::size_t b);

/// Convex parameter polytope P. Non-empty and bounded by construction.
class ParamSet {
 public:
  /// The parameter set of a parameter-free system (m = 0).
  ParamSet();
  explicit ParamSet(const Box& box);
  explicit ParamSet(TemplatePolyhedron poly);

  std::size_t dim() const { return poly_.dim(); }
  const TemplatePolyhedron& polyhedron() const { return poly_; }
  const std::optional<Box>& box() const { return box_; }
  bool is_box() const { return box_.has_value(); }
  /// Vertex list when known (always for boxes; for small polytopes by
  /// enumeration). Empty otherwise.
  const std::vector<Point>& vertices() const { return vertices_; }

 private:
  TemplatePolyhedron poly_;
  std::optional<Box> box_;
  std::vector<Point> vertices_;
};

/// max over p in P of fn(p). Boxes use corner selection by gradient sign.
double max_affine(const AffineCoeff& fn, const ParamSet& params);

}  // namespace polyreach
