#pragma once

// Set integration for x(k+1) = pi(x(k), p): one-step image operators, forward
// and backward iteration, hybrid automata and parameter-region extraction.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "polyreach/bernstein.hpp"
#include "polyreach/geometry.hpp"
#include "polyreach/poly.hpp"

namespace polyreach {

/// Vector field and step a discrete system was obtained from.
struct EulerOrigin {
  PolyVector field;
  double h = 0.0;
};

/// Translates the set recorded at `step`.
struct Event {
  std::size_t step = 0;
  std::vector<double> shift;
};

struct DiscreteSystem {
  PolyVector dynamics;
  ParamSet params;
  std::optional<EulerOrigin> euler;
  /// Known to hold on every reachable state; intersected after each image.
  std::optional<TemplatePolyhedron> invariant;
  std::vector<Event> events;

  std::size_t dim() const { return dynamics.size(); }
  std::size_t param_dim() const { return params.dim(); }
  void validate() const;

  static DiscreteSystem from_field(PolyVector field, double h, ParamSet params);
};

enum class StrategyKind { Bernstein, MultiAffine };

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy(std::string_view text);

inline constexpr std::size_t kDefaultVertexCap = std::size_t{1} << 20;
inline constexpr double kDivergenceLimit = 1e12;

struct ReachStrategy {
  StrategyKind kind = StrategyKind::MultiAffine;
  /// Template rows for the Bernstein kind; empty means the box template.
  Matrix templ;
  std::size_t vertex_cap = kDefaultVertexCap;
  double divergence_limit = kDivergenceLimit;

  static ReachStrategy multiaffine() { return {}; }
  static ReachStrategy bernstein(Matrix h = {}) {
    ReachStrategy s;
    s.kind = StrategyKind::Bernstein;
    s.templ = std::move(h);
    return s;
  }
  Matrix template_for(std::size_t n) const;
};

using ReachSet = std::variant<Box, TemplatePolyhedron>;

std::size_t set_dim(const ReachSet& s);
Box set_bounding_box(const ReachSet& s);
bool set_contains(const ReachSet& s, std::span<const double> x, double tol);
TemplatePolyhedron as_polyhedron(const ReachSet& s);

struct TraceEntry {
  std::size_t step = 0;
  std::string location;
  ReachSet set;
};

struct ReachTrace {
  std::size_t dim = 0;
  std::vector<TraceEntry> entries;

  /// Entries recorded at `step`, in location order.
  std::vector<const TraceEntry*> at_step(std::size_t step) const;
  std::size_t last_step() const;
};

/// Interval hull of pi over the vertices of X x P. Requires multi-affine
/// dynamics and a box parameter set.
Box image_multiaffine(const Box& x, const DiscreteSystem& sys, std::size_t vertex_cap = kDefaultVertexCap);

/// <H, c> with c_i the maximum of the Bernstein upper bound of H^i . pi over X.
TemplatePolyhedron image_bernstein(const TemplatePolyhedron& x, const DiscreteSystem& sys, const Matrix& h);

/// One image step in the representation of the strategy, followed by the
/// invariant of the system when present. Returns nullopt when the invariant
/// leaves nothing.
std::optional<ReachSet> image_step(const ReachSet& x, const DiscreteSystem& sys, const ReachStrategy& strategy);

/// `x` intersected with `g`, kept in the representation of the strategy.
/// nullopt when empty.
std::optional<ReachSet> intersect_set(const ReachSet& x, const TemplatePolyhedron& g,
                                      const ReachStrategy& strategy);

/// Smallest set of the strategy's kind containing both.
ReachSet merge_sets(const ReachSet& a, const ReachSet& b, const ReachStrategy& strategy);

/// Converts to the representation used by the strategy.
ReachSet normalize_set(const ReachSet& x, const ReachStrategy& strategy);

ReachTrace forward_reach(const DiscreteSystem& sys, const ReachSet& x0, const ReachStrategy& strategy,
                         std::size_t steps);

/// The system x - h f(x, p) built from the Euler origin of `sys`.
DiscreteSystem reversed_system(const DiscreteSystem& sys);

ReachTrace backward_reach(const DiscreteSystem& sys, const ReachSet& unsafe, const ReachStrategy& strategy,
                          std::size_t steps);

struct Location {
  std::string id;
  DiscreteSystem system;
  std::optional<TemplatePolyhedron> invariant;
};

struct Transition {
  std::string source;
  std::string target;
  TemplatePolyhedron guard;
};

struct Seed {
  std::string location;
  ReachSet set;
};

struct HybridAutomaton {
  std::vector<Location> locations;
  std::vector<Transition> transitions;
  std::vector<Seed> initial;
  /// Seeds for backward analysis.
  std::vector<Seed> unsafe;

  std::size_t dim() const;
  const Location& location(const std::string& id) const;
  std::size_t location_index(const std::string& id) const;
  void validate() const;
};

/// Each step: every active set advances in its location and, for every
/// outgoing transition whose guard it meets, seeds the target with the
/// intersection at the next step. The source keeps its whole set.
ReachTrace hybrid_reach(const HybridAutomaton& ha, const ReachStrategy& strategy, std::size_t steps);

/// Reversed dynamics in every location, reversed transitions, and the
/// unsafe seeds as initial seeds.
HybridAutomaton reverse_automaton(const HybridAutomaton& ha);

struct AxisFix {
  std::size_t axis = 0;
  double value = 0.0;
};

struct RegionQuery {
  std::vector<AxisFix> fixes;
  std::size_t axis_a = 0;
  std::size_t axis_b = 1;
  /// Only entries of these locations; empty means all.
  std::vector<std::string> locations;
};

/// For every trace entry meeting all hyperplanes, the bounding box of the
/// slice projected on (axis_a, axis_b).
std::vector<Box> extract_param_region(const ReachTrace& trace, const RegionQuery& query);

/// Seeds clipped to `cell` on axes (a, b); every location invariant gains
/// the cell bounds, which is sound when both axes are constant in time.
HybridAutomaton restrict_to_cell(const HybridAutomaton& ha, std::size_t a, std::size_t b, const Box& cell);

struct RegionRun {
  std::vector<Box> boxes;
  std::size_t cells = 0;
};

/// Backward analysis from the unsafe seeds. The range of (axis_a, axis_b)
/// covered by the unsafe seeds is split into split_a x split_b cells, each
/// analysed separately, and the extracted regions are concatenated.
RegionRun param_region(const HybridAutomaton& ha, const RegionQuery& query, std::size_t split_a,
                       std::size_t split_b, const ReachStrategy& strategy, std::size_t steps);

/// Point trajectory of length steps + 1, with events applied.
std::vector<Point> simulate(const DiscreteSystem& sys, Point x0, std::span<const double> p, std::size_t steps);

struct HybridState {
  std::size_t location = 0;
  Point x;
};

/// Urgent run: at each step the first transition (in declaration order)
/// whose guard holds fires with identity reset; otherwise the location's
/// dynamics advance the state.
std::vector<HybridState> simulate_hybrid(const HybridAutomaton& ha, const std::string& location, Point x0,
                                         std::span<const double> p, std::size_t steps);

}  // namespace polyreach
