#include <cmath>

#include "doctest.h"
#include "polyreach/error.hpp"
#include "polyreach/models.hpp"
#include "polyreach/reach.hpp"
#include "polyreach/sampling.hpp"

using namespace polyreach;

namespace {

DiscreteSystem identity_system(std::size_t n) {
  DiscreteSystem sys;
  for (std::size_t k = 0; k < n; ++k) sys.dynamics.push_back(ParamPoly::variable(n, 0, k));
  return sys;
}

DiscreteSystem decay_system() {
  return DiscreteSystem::from_field({-1.0 * ParamPoly::variable(1, 0, 0)}, 0.01, ParamSet());
}

ParamPoly worked_example() {
  const ParamPoly x = ParamPoly::variable(1, 1, 0);
  const ParamPoly p = ParamPoly::parameter(1, 1, 0);
  const ParamPoly one = ParamPoly::constant(1, 1, 1.0);
  const ParamPoly x2 = x * x;
  return p * (one - x + 2.0 * (x2 * x2)) + 3.0 * x2 - x2 * x - 2.5 * (x2 * x2 * x);
}

}  // namespace

TEST_CASE("image_multiaffine") {
  DiscreteSystem prod;
  prod.dynamics = {ParamPoly::variable(2, 0, 0) * ParamPoly::variable(2, 0, 1), ParamPoly::variable(2, 0, 1)};
  const Box img = image_multiaffine(Box::unit(2), prod);
  CHECK(img.lower[0] == 0.0);
  CHECK(img.upper[0] == 1.0);

  DiscreteSystem px;
  px.dynamics = {ParamPoly::parameter(1, 1, 0) * ParamPoly::variable(1, 1, 0)};
  px.params = ParamSet(Box({0.5}, {1.5}));
  const Box r = image_multiaffine(Box::unit(1), px);
  CHECK(r.lower[0] == 0.0);
  CHECK(r.upper[0] == 1.5);

  DiscreteSystem sq;
  sq.dynamics = {ParamPoly::variable(1, 0, 0) * ParamPoly::variable(1, 0, 0)};
  CHECK_THROWS_AS(image_multiaffine(Box::unit(1), sq), Error);
}

TEST_CASE("image_multiaffine contains simulated bees steps") {
  const BeesModel m = build_bees(BeesConfig{});
  const Box img = image_multiaffine(m.initial, m.system);
  Rng rng(1);
  const Box pb = *m.system.params.box();
  for (int s = 0; s < 1000; ++s) {
    const Point y = eval(m.system.dynamics, sample_box(rng, m.initial), sample_box(rng, pb));
    CHECK(img.contains(y, 1e-7));
  }
}

TEST_CASE("image_bernstein") {
  const Box x({-1, 2}, {3, 5});
  const Box same = set_bounding_box(image_bernstein(TemplatePolyhedron::from_box(x), identity_system(2), box_template(2)));
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::abs(same.lower[k] - x.lower[k]) <= 1e-6);
    CHECK(std::abs(same.upper[k] - x.upper[k]) <= 1e-6);
  }

  // Worked polynomial as a 1-D map over [0,1]: the upper face is max of the
  // fitted upper line over the unit interval.
  DiscreteSystem one;
  one.dynamics = {worked_example()};
  one.params = ParamSet(Box({0.5}, {1.5}));
  const TemplatePolyhedron img = image_bernstein(TemplatePolyhedron::from_box(Box::unit(1)), one, {{1.0}});
  const AffineBound fit = fit_affine_bounds(bernstein_coefficients(worked_example()), one.params);
  const double expect = std::max(fit.upper(std::vector{0.0}), fit.upper(std::vector{1.0}));
  CHECK(img.c()[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(img.c()[0] == doctest::Approx(0.7762 + 0.9143 + 0.8095).epsilon(1e-3));

  Rng rng(77);
  for (int t = 0; t < 5; ++t) {
    DiscreteSystem sys;
    sys.dynamics = {random_poly(rng, 2, 1, 2), random_poly(rng, 2, 1, 2)};
    sys.params = ParamSet(random_box(rng, 1, 1.0, 0.1, 1.0));
    const Box xb = random_box(rng, 2, 2.0, 0.1, 1.0);
    const TemplatePolyhedron out = image_bernstein(TemplatePolyhedron::from_box(xb), sys, octagon_template(2));
    for (int s = 0; s < 10000; ++s) {
      const Point y = eval(sys.dynamics, sample_box(rng, xb), sample_box(rng, *sys.params.box()));
      CHECK(out.contains(y, 1e-9));
    }
  }
}

TEST_CASE("forward_reach") {
  const Box x0({1, -2}, {2, 3});
  for (const auto& s : {ReachStrategy::multiaffine(), ReachStrategy::bernstein()}) {
    const ReachTrace t = forward_reach(identity_system(2), x0, s, 3);
    REQUIRE(t.entries.size() == 4);
    for (const auto& e : t.entries) {
      const Box b = set_bounding_box(e.set);
      for (std::size_t k = 0; k < 2; ++k) {
        CHECK(b.lower[k] == doctest::Approx(x0.lower[k]));
        CHECK(b.upper[k] == doctest::Approx(x0.upper[k]));
      }
    }
  }
  const ReachTrace d = forward_reach(decay_system(), Box({1}, {2}), ReachStrategy::multiaffine(), 1);
  const Box b1 = set_bounding_box(d.entries[1].set);
  CHECK(b1.lower[0] == doctest::Approx(0.99));
  CHECK(b1.upper[0] == doctest::Approx(1.98));
  CHECK(forward_reach(decay_system(), Box({1}, {2}), ReachStrategy::multiaffine(), 0).entries.size() == 1);
}

TEST_CASE("forward_reach applies events") {
  DiscreteSystem sys = identity_system(1);
  sys.events.push_back({2, {5.0}});
  const ReachTrace t = forward_reach(sys, Box({0}, {1}), ReachStrategy::multiaffine(), 3);
  CHECK(set_bounding_box(t.entries[1].set).lower[0] == 0.0);
  CHECK(set_bounding_box(t.entries[2].set).lower[0] == 5.0);
  CHECK(set_bounding_box(t.entries[3].set).lower[0] == 5.0);
  const auto traj = simulate(sys, {0.5}, {}, 3);
  CHECK(traj[1][0] == 0.5);
  CHECK(traj[2][0] == 5.5);
}

TEST_CASE("forward_reach detects divergence") {
  DiscreteSystem sys;
  sys.dynamics = {1e4 * ParamPoly::variable(1, 0, 0)};
  try {
    forward_reach(sys, Box({1}, {2}), ReachStrategy::multiaffine(), 10);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Overflow);
  }
}

TEST_CASE("backward_reach") {
  const ReachTrace t = backward_reach(decay_system(), Box({1}, {1}), ReachStrategy::multiaffine(), 1);
  const Box b = set_bounding_box(t.entries[1].set);
  CHECK(b.lower[0] == doctest::Approx(1.01));
  CHECK(b.upper[0] == doctest::Approx(1.01));

  const DiscreteSystem still = DiscreteSystem::from_field({ParamPoly(1, 0)}, 0.1, ParamSet());
  const ReachTrace z = backward_reach(still, Box({2}, {3}), ReachStrategy::bernstein(), 4);
  for (const auto& e : z.entries) CHECK(set_bounding_box(e.set) == Box({2}, {3}));
}

TEST_CASE("hybrid_reach with one location matches forward_reach") {
  HybridAutomaton ha;
  ha.locations.push_back({"only", decay_system(), std::nullopt});
  ha.initial.push_back({"only", Box({1}, {2})});
  const ReachTrace h = hybrid_reach(ha, ReachStrategy::multiaffine(), 5);
  const ReachTrace f = forward_reach(decay_system(), Box({1}, {2}), ReachStrategy::multiaffine(), 5);
  REQUIRE(h.entries.size() == f.entries.size());
  for (std::size_t k = 0; k < f.entries.size(); ++k) {
    CHECK(h.entries[k].location == "only");
    CHECK(set_bounding_box(h.entries[k].set) == set_bounding_box(f.entries[k].set));
  }
}

TEST_CASE("cardiac: loc2 appears right after loc1 meets the guard") {
  const CardiacConfig cfg;
  const HybridAutomaton ha = build_cardiac(cfg);
  const ReachTrace t = hybrid_reach(ha, ReachStrategy::multiaffine(), 120);
  std::optional<std::size_t> first_guard, first_loc2;
  for (const auto& e : t.entries) {
    if (e.location == cardiac::kLoc1Stim && !first_guard && set_bounding_box(e.set).upper[cardiac::kU] >= cfg.guard12) {
      first_guard = e.step;
    }
    if (e.location == cardiac::kLoc2Stim && !first_loc2) first_loc2 = e.step;
  }
  REQUIRE(first_guard.has_value());
  REQUIRE(first_loc2.has_value());
  CHECK(*first_loc2 == *first_guard + 1);
}

TEST_CASE("unreachable guard keeps the target out of the trace") {
  CardiacConfig cfg;
  cfg.guard12 = 0.9;
  cfg.guard23 = 0.95;
  const ReachTrace t = hybrid_reach(build_cardiac(cfg), ReachStrategy::multiaffine(), 300);
  for (const auto& e : t.entries) CHECK(e.location != cardiac::kLoc2Stim);
}

TEST_CASE("extract_param_region") {
  ReachTrace t;
  t.dim = 4;
  t.entries.push_back({0, "", Box({0, 0, 0, 0}, {1, 1, 1, 1})});
  t.entries.push_back({1, "", Box({0.5, 0, 2, 3}, {1, 1, 4, 5})});
  RegionQuery q;
  q.fixes = {{0, 0.0}};
  q.axis_a = 2;
  q.axis_b = 3;
  const auto boxes = extract_param_region(t, q);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == Box({0, 0}, {1, 1}));

  ReachTrace tp;
  tp.dim = 4;
  tp.entries.push_back({0, "", TemplatePolyhedron::from_box(Box({0, 0, 0, 0}, {1, 1, 1, 1}), octagon_template(4))});
  const auto pb = extract_param_region(tp, q);
  REQUIRE(pb.size() == 1);
  CHECK(pb[0].upper[0] == doctest::Approx(1.0));
}

TEST_CASE("backward cardiac states lead forward into the unsafe set") {
  const CardiacConfig cfg;
  const HybridAutomaton ha = build_cardiac(cfg);
  const Location& loc2 = ha.location(cardiac::kLoc2Stim);
  const DiscreteSystem rev = reversed_system(loc2.system);
  const Box unsafe = set_bounding_box(ha.unsafe.front().set);
  const std::size_t steps = 20;
  const ReachTrace back = backward_reach(loc2.system, unsafe, ReachStrategy::multiaffine(), steps);
  Box target = unsafe;
  for (std::size_t k = 0; k < target.dim(); ++k) {
    const double pad = 0.05 * std::max(target.width(k), std::max(std::abs(target.lower[k]), std::abs(target.upper[k])));
    target.lower[k] -= pad;
    target.upper[k] += pad;
  }
  Rng rng(13);
  std::size_t traced = 0, returned = 0;
  const int samples = 500;
  for (int s = 0; s < samples; ++s) {
    Point x = sample_box(rng, unsafe);
    for (std::size_t k = 0; k < steps; ++k) x = eval(rev.dynamics, x, {});
    traced += set_contains(back.entries.back().set, x, 1e-7);
    for (std::size_t k = 0; k < steps; ++k) x = eval(loc2.system.dynamics, x, {});
    returned += target.contains(x);
  }
  CHECK(traced == samples);
  CHECK(returned == samples);
}

TEST_CASE("strategy names") {
  CHECK(parse_strategy("bernstein") == StrategyKind::Bernstein);
  CHECK(to_string(StrategyKind::MultiAffine) == "multiaffine");
  CHECK_THROWS_AS(parse_strategy("octagon"), Error);
}
