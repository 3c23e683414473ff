#include "polyreach/reach.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace polyreach {

void DiscreteSystem::validate() const {
  check_poly_vector(dynamics);
  require(dynamics.front().n_vars() == dynamics.size(), ErrorKind::DimensionMismatch,
          "dynamics must have one component per state variable");
  require(dynamics.front().n_params() == params.dim(), ErrorKind::DimensionMismatch,
          "dynamics and parameter set disagree on the parameter count");
  if (invariant) {
    require(invariant->dim() == dim(), ErrorKind::DimensionMismatch, "invariant dimension");
  }
  for (const auto& e : events) {
    require(e.shift.size() == dim(), ErrorKind::DimensionMismatch, "event shift dimension");
  }
  if (euler) {
    require(euler->field.size() == dim(), ErrorKind::DimensionMismatch, "vector field dimension");
  }
}

DiscreteSystem DiscreteSystem::from_field(PolyVector field, double h, ParamSet params) {
  DiscreteSystem sys;
  sys.dynamics = euler_discretize(field, h);
  sys.params = std::move(params);
  sys.euler = EulerOrigin{std::move(field), h};
  sys.validate();
  return sys;
}

std::string_view to_string(StrategyKind kind) {
  return kind == StrategyKind::Bernstein ? "bernstein" : "multiaffine";
}

StrategyKind parse_strategy(std::string_view text) {
  if (text == "bernstein") return StrategyKind::Bernstein;
  if (text == "multiaffine") return StrategyKind::MultiAffine;
  fail(ErrorKind::InvalidInput, "unknown strategy '" + std::string(text) + "'");
}

Matrix ReachStrategy::template_for(std::size_t n) const {
  if (templ.empty()) return box_template(n);
  for (const auto& row : templ) {
    require(row.size() == n, ErrorKind::DimensionMismatch, "template width differs from system dimension");
  }
  return templ;
}

// ---------------------------------------------------------------------------
// ReachSet helpers

std::size_t set_dim(const ReachSet& s) {
  return std::visit([](const auto& v) { return v.dim(); }, s);
}

Box set_bounding_box(const ReachSet& s) {
  if (const auto* b = std::get_if<Box>(&s)) return *b;
  return bounding_box(std::get<TemplatePolyhedron>(s));
}

bool set_contains(const ReachSet& s, std::span<const double> x, double tol) {
  return std::visit([&](const auto& v) { return v.contains(x, tol); }, s);
}

TemplatePolyhedron as_polyhedron(const ReachSet& s) {
  if (const auto* b = std::get_if<Box>(&s)) return TemplatePolyhedron::from_box(*b);
  return std::get<TemplatePolyhedron>(s);
}

namespace {

ReachSet translate(const ReachSet& s, std::span<const double> shift) {
  return std::visit([&](const auto& v) -> ReachSet { return v.translated(shift); }, s);
}

void check_divergence(const ReachSet& s, double limit, std::size_t step) {
  const Box b = set_bounding_box(s);
  for (std::size_t k = 0; k < b.dim(); ++k) {
    if (!(std::abs(b.lower[k]) <= limit && std::abs(b.upper[k]) <= limit)) {
      fail(ErrorKind::Overflow, "reachable set diverged on axis " + std::to_string(k) + " at step " +
                                    std::to_string(step));
    }
  }
}

std::optional<Box> intersect_boxes(const Box& a, const Box& b) {
  std::vector<double> lo(a.dim()), hi(a.dim());
  for (std::size_t k = 0; k < a.dim(); ++k) {
    lo[k] = std::max(a.lower[k], b.lower[k]);
    hi[k] = std::min(a.upper[k], b.upper[k]);
    if (lo[k] > hi[k]) return std::nullopt;
  }
  return Box(std::move(lo), std::move(hi));
}

}  // namespace

// ---------------------------------------------------------------------------
// Image operators

Box image_multiaffine(const Box& x, const DiscreteSystem& sys, std::size_t vertex_cap) {
  const std::size_t n = sys.dim();
  const std::size_t m = sys.param_dim();
  require(x.dim() == n, ErrorKind::DimensionMismatch, "set dimension differs from system");
  if (!is_multiaffine(sys.dynamics, true)) {
    fail(ErrorKind::StrategyViolation, "multi-affine image requires multi-affine dynamics");
  }
  if (!sys.params.is_box()) {
    fail(ErrorKind::StrategyViolation, "multi-affine image requires a box parameter set");
  }
  if (n + m >= 63 || (std::size_t{1} << (n + m)) > vertex_cap) {
    fail(ErrorKind::ResourceLimit, "2^" + std::to_string(n + m) + " vertices exceed the vertex cap");
  }
  const std::vector<Point> xs = box_vertices(x, 62);
  const std::vector<Point>& ps = sys.params.vertices();
  std::vector<Point> images;
  images.reserve(xs.size() * ps.size());
  for (const auto& v : xs) {
    for (const auto& p : ps) images.push_back(eval(sys.dynamics, v, p));
  }
  return interval_hull(images);
}

TemplatePolyhedron image_bernstein(const TemplatePolyhedron& x, const DiscreteSystem& sys, const Matrix& h) {
  const std::size_t n = sys.dim();
  require(x.dim() == n, ErrorKind::DimensionMismatch, "set dimension differs from system");
  require(!h.empty(), ErrorKind::InvalidInput, "empty template");

  const Box b = bounding_box(x);
  const AffineMap tau = unit_to_box_map(b);
  const TemplatePolyhedron y = preimage_under_map(x, tau).intersect(TemplatePolyhedron::from_box(Box::unit(n)));

  std::vector<double> c;
  c.reserve(h.size());
  for (const auto& row : h) {
    require(row.size() == n, ErrorKind::DimensionMismatch, "template width differs from system dimension");
    const ParamPoly sigma = linear_combination(sys.dynamics, row);
    const ParamPoly gamma = compose_box(sigma, tau);
    const AffineBound bound = fit_affine_bounds(bernstein_coefficients(gamma), sys.params);
    const std::vector<double> slope(bound.zeta.begin(), bound.zeta.begin() + static_cast<std::ptrdiff_t>(n));
    c.push_back(support(y, slope) + bound.zeta[n] + bound.delta_upper);
  }
  return TemplatePolyhedron(h, std::move(c));
}

std::optional<ReachSet> intersect_set(const ReachSet& x, const TemplatePolyhedron& g,
                                      const ReachStrategy& strategy) {
  require(g.dim() == set_dim(x), ErrorKind::DimensionMismatch, "constraint dimension differs from set");
  if (g.rows() == 0) return normalize_set(x, strategy);
  if (strategy.kind == StrategyKind::MultiAffine) {
    const Box bx = set_bounding_box(x);
    std::optional<Box> gb;
    try {
      gb = g.as_box();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::EmptySet) return std::nullopt;
      throw;
    }
    if (gb) {
      auto r = intersect_boxes(bx, *gb);
      if (!r) return std::nullopt;
      return ReachSet(*r);
    }
    const TemplatePolyhedron p = TemplatePolyhedron::from_box(bx).intersect(g);
    if (is_empty(p)) return std::nullopt;
    return ReachSet(bounding_box(p));
  }
  const TemplatePolyhedron p = as_polyhedron(x).intersect(g);
  if (is_empty(p)) return std::nullopt;
  return ReachSet(retemplate(p, strategy.template_for(p.dim())));
}

ReachSet normalize_set(const ReachSet& x, const ReachStrategy& strategy) {
  if (strategy.kind == StrategyKind::MultiAffine) return set_bounding_box(x);
  const Matrix h = strategy.template_for(set_dim(x));
  if (const auto* b = std::get_if<Box>(&x)) return TemplatePolyhedron::from_box(*b, h);
  const auto& p = std::get<TemplatePolyhedron>(x);
  if (p.h() == h) return p;
  return retemplate(p, h);
}

ReachSet merge_sets(const ReachSet& a, const ReachSet& b, const ReachStrategy& strategy) {
  require(set_dim(a) == set_dim(b), ErrorKind::DimensionMismatch, "merged sets differ in dimension");
  if (strategy.kind == StrategyKind::MultiAffine) {
    const Box ba = set_bounding_box(a);
    const Box bb = set_bounding_box(b);
    return interval_hull({ba.lower, ba.upper, bb.lower, bb.upper});
  }
  const auto pa = std::get<TemplatePolyhedron>(normalize_set(a, strategy));
  const auto pb = std::get<TemplatePolyhedron>(normalize_set(b, strategy));
  std::vector<double> c(pa.rows());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::max(pa.c()[i], pb.c()[i]);
  return TemplatePolyhedron(pa.h(), std::move(c));
}

std::optional<ReachSet> image_step(const ReachSet& x, const DiscreteSystem& sys, const ReachStrategy& strategy) {
  ReachSet img;
  if (strategy.kind == StrategyKind::MultiAffine) {
    img = image_multiaffine(set_bounding_box(x), sys, strategy.vertex_cap);
  } else {
    img = image_bernstein(as_polyhedron(x), sys, strategy.template_for(sys.dim()));
  }
  if (sys.invariant) return intersect_set(img, *sys.invariant, strategy);
  return img;
}

// ---------------------------------------------------------------------------
// Traces

std::vector<const TraceEntry*> ReachTrace::at_step(std::size_t step) const {
  std::vector<const TraceEntry*> out;
  for (const auto& e : entries) {
    if (e.step == step) out.push_back(&e);
  }
  return out;
}

std::size_t ReachTrace::last_step() const { return entries.empty() ? 0 : entries.back().step; }

ReachTrace forward_reach(const DiscreteSystem& sys, const ReachSet& x0, const ReachStrategy& strategy,
                         std::size_t steps) {
  sys.validate();
  require(set_dim(x0) == sys.dim(), ErrorKind::DimensionMismatch, "initial set dimension differs from system");

  auto apply_events = [&](ReachSet s, std::size_t step) {
    for (const auto& e : sys.events) {
      if (e.step == step) s = translate(s, e.shift);
    }
    return s;
  };

  ReachTrace trace;
  trace.dim = sys.dim();
  ReachSet cur = apply_events(normalize_set(x0, strategy), 0);
  check_divergence(cur, strategy.divergence_limit, 0);
  trace.entries.push_back({0, "", cur});
  for (std::size_t k = 1; k <= steps; ++k) {
    auto next = image_step(cur, sys, strategy);
    if (!next) fail(ErrorKind::EmptySet, "reachable set left the invariant at step " + std::to_string(k));
    cur = apply_events(std::move(*next), k);
    check_divergence(cur, strategy.divergence_limit, k);
    trace.entries.push_back({k, "", cur});
  }
  return trace;
}

DiscreteSystem reversed_system(const DiscreteSystem& sys) {
  if (!sys.euler) {
    fail(ErrorKind::InvalidInput, "backward analysis needs the vector field and step of the dynamics");
  }
  PolyVector neg;
  neg.reserve(sys.euler->field.size());
  for (const auto& f : sys.euler->field) neg.push_back(-f);
  DiscreteSystem rev = DiscreteSystem::from_field(std::move(neg), sys.euler->h, sys.params);
  rev.invariant = sys.invariant;
  return rev;
}

ReachTrace backward_reach(const DiscreteSystem& sys, const ReachSet& unsafe, const ReachStrategy& strategy,
                          std::size_t steps) {
  return forward_reach(reversed_system(sys), unsafe, strategy, steps);
}

// ---------------------------------------------------------------------------
// Hybrid automata

std::size_t HybridAutomaton::dim() const {
  require(!locations.empty(), ErrorKind::InvalidInput, "automaton without locations");
  return locations.front().system.dim();
}

std::size_t HybridAutomaton::location_index(const std::string& id) const {
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (locations[i].id == id) return i;
  }
  fail(ErrorKind::InvalidInput, "unknown location '" + id + "'");
}

const Location& HybridAutomaton::location(const std::string& id) const { return locations[location_index(id)]; }

void HybridAutomaton::validate() const {
  const std::size_t n = dim();
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const auto& loc = locations[i];
    loc.system.validate();
    require(loc.system.dim() == n, ErrorKind::DimensionMismatch, "locations differ in dimension");
    if (loc.invariant) {
      require(loc.invariant->dim() == n, ErrorKind::DimensionMismatch, "location invariant dimension");
    }
    for (std::size_t j = 0; j < i; ++j) {
      require(locations[j].id != loc.id, ErrorKind::InvalidInput, "duplicate location '" + loc.id + "'");
    }
  }
  for (const auto& t : transitions) {
    location_index(t.source);
    location_index(t.target);
    require(t.guard.dim() == n, ErrorKind::DimensionMismatch, "guard dimension");
  }
  for (const auto* seeds : {&initial, &unsafe}) {
    for (const auto& s : *seeds) {
      location_index(s.location);
      require(set_dim(s.set) == n, ErrorKind::DimensionMismatch, "seed dimension");
    }
  }
}

ReachTrace hybrid_reach(const HybridAutomaton& ha, const ReachStrategy& strategy, std::size_t steps) {
  ha.validate();
  const std::size_t nloc = ha.locations.size();
  using Slots = std::vector<std::optional<ReachSet>>;

  auto admit = [&](Slots& slots, std::size_t li, const ReachSet& s) {
    std::optional<ReachSet> r = normalize_set(s, strategy);
    if (const auto& inv = ha.locations[li].invariant) r = intersect_set(*r, *inv, strategy);
    if (!r) return;
    slots[li] = slots[li] ? merge_sets(*slots[li], *r, strategy) : *r;
  };

  ReachTrace trace;
  trace.dim = ha.dim();
  Slots cur(nloc);
  for (const auto& seed : ha.initial) admit(cur, ha.location_index(seed.location), seed.set);

  auto record = [&](const Slots& slots, std::size_t step) {
    bool any = false;
    for (std::size_t li = 0; li < nloc; ++li) {
      if (!slots[li]) continue;
      check_divergence(*slots[li], strategy.divergence_limit, step);
      trace.entries.push_back({step, ha.locations[li].id, *slots[li]});
      any = true;
    }
    return any;
  };

  if (!record(cur, 0)) return trace;
  for (std::size_t k = 1; k <= steps; ++k) {
    Slots next(nloc);
    for (std::size_t li = 0; li < nloc; ++li) {
      if (!cur[li]) continue;
      const Location& loc = ha.locations[li];
      for (const auto& t : ha.transitions) {
        if (t.source != loc.id) continue;
        if (auto g = intersect_set(*cur[li], t.guard, strategy)) admit(next, ha.location_index(t.target), *g);
      }
      if (auto img = image_step(*cur[li], loc.system, strategy)) admit(next, li, *img);
    }
    cur = std::move(next);
    if (!record(cur, k)) break;
  }
  return trace;
}

HybridAutomaton reverse_automaton(const HybridAutomaton& ha) {
  ha.validate();
  HybridAutomaton rev;
  for (const auto& loc : ha.locations) rev.locations.push_back({loc.id, reversed_system(loc.system), loc.invariant});
  for (const auto& t : ha.transitions) rev.transitions.push_back({t.target, t.source, t.guard});
  rev.initial = ha.unsafe;
  return rev;
}

std::vector<Box> extract_param_region(const ReachTrace& trace, const RegionQuery& query) {
  const std::size_t n = trace.dim;
  require(query.axis_a < n && query.axis_b < n && query.axis_a != query.axis_b, ErrorKind::DimensionMismatch,
          "projection axes out of range");
  for (const auto& f : query.fixes) {
    require(f.axis < n, ErrorKind::DimensionMismatch, "fixed axis out of range");
  }
  std::vector<Box> out;
  for (const auto& e : trace.entries) {
    if (!query.locations.empty() &&
        std::find(query.locations.begin(), query.locations.end(), e.location) == query.locations.end()) {
      continue;
    }
    Box slice;
    if (const auto* b = std::get_if<Box>(&e.set)) {
      const bool meets = std::all_of(query.fixes.begin(), query.fixes.end(), [&](const AxisFix& f) {
        return b->lower[f.axis] <= f.value && f.value <= b->upper[f.axis];
      });
      if (!meets) continue;
      slice = *b;
    } else {
      TemplatePolyhedron p = std::get<TemplatePolyhedron>(e.set);
      for (const auto& f : query.fixes) {
        std::vector<double> up(n, 0.0), down(n, 0.0);
        up[f.axis] = 1.0;
        down[f.axis] = -1.0;
        p = p.intersect(TemplatePolyhedron({up, down}, {f.value, -f.value}));
      }
      if (is_empty(p)) continue;
      slice = bounding_box(p);
    }
    out.push_back(Box({slice.lower[query.axis_a], slice.lower[query.axis_b]},
                      {slice.upper[query.axis_a], slice.upper[query.axis_b]}));
  }
  return out;
}

HybridAutomaton restrict_to_cell(const HybridAutomaton& ha, std::size_t a, std::size_t b, const Box& cell) {
  const std::size_t n = ha.dim();
  require(a < n && b < n && a != b, ErrorKind::DimensionMismatch, "cell axes out of range");
  require(cell.dim() == 2, ErrorKind::DimensionMismatch, "cell must be 2-dimensional");
  auto row = [&](std::size_t axis, double sign) {
    std::vector<double> r(n, 0.0);
    r[axis] = sign;
    return r;
  };
  const TemplatePolyhedron bounds({row(a, 1.0), row(a, -1.0), row(b, 1.0), row(b, -1.0)},
                                  {cell.upper[0], -cell.lower[0], cell.upper[1], -cell.lower[1]});
  HybridAutomaton out = ha;
  auto clip = [&](std::vector<Seed>& seeds) {
    std::vector<Seed> kept;
    for (const auto& s : seeds) {
      const ReachStrategy keep_kind =
          std::holds_alternative<Box>(s.set) ? ReachStrategy::multiaffine()
                                             : ReachStrategy::bernstein(std::get<TemplatePolyhedron>(s.set).h());
      if (auto r = intersect_set(s.set, bounds, keep_kind)) kept.push_back({s.location, *r});
    }
    seeds = std::move(kept);
  };
  clip(out.initial);
  clip(out.unsafe);
  for (auto& loc : out.locations) loc.invariant = loc.invariant ? loc.invariant->intersect(bounds) : bounds;
  return out;
}

RegionRun param_region(const HybridAutomaton& ha, const RegionQuery& query, std::size_t split_a,
                       std::size_t split_b, const ReachStrategy& strategy, std::size_t steps) {
  require(split_a >= 1 && split_b >= 1, ErrorKind::InvalidInput, "split counts must be positive");
  const HybridAutomaton rev = reverse_automaton(ha);
  RegionRun run;
  if (rev.initial.empty()) return run;
  std::vector<Point> corners;
  for (const auto& s : rev.initial) {
    const Box b = set_bounding_box(s.set);
    corners.push_back(b.lower);
    corners.push_back(b.upper);
  }
  const Box range = interval_hull(corners);
  const std::size_t a = query.axis_a;
  const std::size_t b = query.axis_b;
  auto edge = [](double lo, double hi, std::size_t i, std::size_t count) {
    return i == count ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count);
  };
  for (std::size_t i = 0; i < split_a; ++i) {
    for (std::size_t j = 0; j < split_b; ++j) {
      const Box cell({edge(range.lower[a], range.upper[a], i, split_a), edge(range.lower[b], range.upper[b], j, split_b)},
                     {edge(range.lower[a], range.upper[a], i + 1, split_a),
                      edge(range.lower[b], range.upper[b], j + 1, split_b)});
      const ReachTrace trace = hybrid_reach(restrict_to_cell(rev, a, b, cell), strategy, steps);
      const std::vector<Box> part = extract_param_region(trace, query);
      // Drop boxes covered by another box of the same cell.
      for (std::size_t k = 0; k < part.size(); ++k) {
        bool covered = false;
        for (std::size_t m = 0; m < part.size() && !covered; ++m) {
          if (m == k || !part[m].contains(part[k])) continue;
          covered = !part[k].contains(part[m]) || m < k;
        }
        if (!covered) run.boxes.push_back(part[k]);
      }
      ++run.cells;
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Point simulation

std::vector<Point> simulate(const DiscreteSystem& sys, Point x0, std::span<const double> p, std::size_t steps) {
  sys.validate();
  require(x0.size() == sys.dim() && p.size() == sys.param_dim(), ErrorKind::DimensionMismatch,
          "simulation start or parameter dimension");
  auto apply_events = [&](Point& x, std::size_t step) {
    for (const auto& e : sys.events) {
      if (e.step != step) continue;
      for (std::size_t k = 0; k < x.size(); ++k) x[k] += e.shift[k];
    }
  };
  std::vector<Point> out;
  out.reserve(steps + 1);
  apply_events(x0, 0);
  out.push_back(std::move(x0));
  for (std::size_t k = 1; k <= steps; ++k) {
    Point x = eval(sys.dynamics, out.back(), p);
    apply_events(x, k);
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<HybridState> simulate_hybrid(const HybridAutomaton& ha, const std::string& location, Point x0,
                                         std::span<const double> p, std::size_t steps) {
  ha.validate();
  std::vector<HybridState> out;
  out.reserve(steps + 1);
  out.push_back({ha.location_index(location), std::move(x0)});
  for (std::size_t k = 1; k <= steps; ++k) {
    const HybridState& cur = out.back();
    const Location& loc = ha.locations[cur.location];
    std::optional<HybridState> next;
    for (const auto& t : ha.transitions) {
      if (t.source == loc.id && t.guard.contains(cur.x)) {
        next = HybridState{ha.location_index(t.target), cur.x};
        break;
      }
    }
    if (!next) next = HybridState{cur.location, eval(loc.system.dynamics, cur.x, p)};
    out.push_back(std::move(*next));
  }
  return out;
}

}  // namespace polyreach
