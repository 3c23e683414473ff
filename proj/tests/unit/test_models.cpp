#include <cmath>
#include <numeric>

#include "doctest.h"
#include "polyreach/error.hpp"
#include "polyreach/models.hpp"
#include "polyreach/sampling.hpp"

using namespace polyreach;

namespace {

double total(const Point& x) { return std::accumulate(x.begin(), x.end(), 0.0); }

ReachTrace gap_trace(const std::vector<double>& site1, const std::vector<double>& site2) {
  ReachTrace t;
  t.dim = 5;
  for (std::size_t k = 0; k < site1.size(); ++k) {
    std::vector<double> x(5, 0.0);
    x[bees::kY1] = site1[k] * 1000.0;
    x[bees::kY2] = site2[k] * 1000.0;
    t.entries.push_back({k, "", Box::point(x)});
  }
  return t;
}

}  // namespace

TEST_CASE("bees: recruitment term carries h * beta1") {
  const BeesConfig cfg;
  const BeesModel m = build_bees(cfg);
  MultiIndex xy1(5, 0);
  xy1[bees::kX] = 1;
  xy1[bees::kY1] = 1;
  const auto& terms = m.system.dynamics[bees::kY1].terms();
  REQUIRE(terms.count(xy1) == 1);
  CHECK(terms.at(xy1).constant == doctest::Approx(cfg.h * cfg.beta1 / cfg.N));
  CHECK(is_multiaffine(m.system.dynamics, true));
  CHECK(m.system.events.size() == 1);
  CHECK(m.system.events[0].step == 300);
}

TEST_CASE("bees: degenerate beta2 gives a parameter-free image") {
  BeesConfig cfg;
  cfg.beta2_lo = cfg.beta2_hi = 1.0;
  const BeesModel m = build_bees(cfg);
  CHECK(m.system.params.vertices().size() == 1);
  const Box b = *m.system.params.box();
  CHECK(b.lower == b.upper);
}

TEST_CASE("bees: one update step conserves the population") {
  const BeesModel m = build_bees(BeesConfig{});
  Rng rng(19);
  const Box states(std::vector<double>(5, 0.0), std::vector<double>(5, 200.0));
  const Box pb = *m.system.params.box();
  for (int s = 0; s < 200; ++s) {
    const Point x = sample_box(rng, states);
    const Point y = eval(m.system.dynamics, x, sample_box(rng, pb));
    CHECK(std::abs(total(y) - total(x)) <= 1e-9);
  }
}

TEST_CASE("bees: the literal Z2 equation does not conserve") {
  BeesConfig cfg;
  cfg.z2_form = Z2Form::AsPrinted;
  cfg.conservation_invariant = false;
  cfg.beta2_lo = cfg.beta2_hi = 1.5;
  const BeesModel m = build_bees(cfg);
  const Point x = {500, 100, 100, 100, 100};
  const Point y = eval(m.system.dynamics, x, std::vector{1.5e-3});
  CHECK(std::abs(total(y) - total(x)) > 1e-6);

  cfg.conservation_invariant = true;
  CHECK_THROWS_AS(build_bees(cfg), Error);
}

TEST_CASE("bees: config validation") {
  BeesConfig cfg;
  cfg.beta2_lo = 2.0;
  cfg.beta2_hi = 1.0;
  CHECK_THROWS_AS(build_bees(cfg), Error);
  BeesConfig big;
  big.h = 1.0;
  CHECK_THROWS_AS(build_bees(big), Error);
}

TEST_CASE("consensus_metric") {
  const std::vector<double> zero(20, 0.0);
  CHECK(consensus_metric(gap_trace(zero, zero), {1000.0, 0.3, 10}).kind == ConsensusKind::None);

  std::vector<double> lead, trail;
  for (int k = 0; k < 20; ++k) {
    lead.push_back(0.1 + 0.5 * k / 19.0);
    trail.push_back(0.0);
  }
  const ConsensusVerdict v1 = consensus_metric(gap_trace(lead, trail), {1000.0, 0.3, 10});
  CHECK(v1.kind == ConsensusKind::Site1);
  CHECK(v1.final_gap == doctest::Approx(0.6));
  CHECK(v1.gap_trend > 0.0);
  CHECK(consensus_metric(gap_trace(trail, lead), {1000.0, 0.3, 10}).kind == ConsensusKind::Site2);

  std::vector<double> falling(lead.rbegin(), lead.rend());
  CHECK(consensus_metric(gap_trace(falling, trail), {1000.0, 0.05, 10}).kind == ConsensusKind::None);
}

TEST_CASE("cardiac structure") {
  const CardiacConfig cfg;
  const HybridAutomaton ha = build_cardiac(cfg);
  REQUIRE(ha.initial.size() == 1);
  const Box x0 = set_bounding_box(ha.initial[0].set);
  CHECK(ha.initial[0].location == cardiac::kLoc1Stim);
  CHECK(x0.lower[cardiac::kU] == 0.0);
  CHECK(x0.upper[cardiac::kU] == 0.0);
  CHECK(x0.lower[cardiac::kG1] == cfg.g1_lo);
  CHECK(x0.upper[cardiac::kG1] == cfg.g1_hi);
  CHECK(x0.lower[cardiac::kG2] == cfg.g2_lo);
  CHECK(x0.upper[cardiac::kG2] == cfg.g2_hi);

  std::size_t to3 = 0;
  for (const auto& tr : ha.transitions) {
    if (tr.target != cardiac::kLoc3) continue;
    ++to3;
    CHECK(tr.source.rfind("loc2", 0) == 0);
    CHECK(tr.guard.rows() == 1);
    CHECK(tr.guard.h()[0][cardiac::kU] == -1.0);
    CHECK(tr.guard.c()[0] == -cfg.guard23);
  }
  CHECK(to3 == 2);
}

TEST_CASE("cardiac: no stimulus keeps u at zero") {
  CardiacConfig cfg;
  cfg.e_amp = 0.0;
  const HybridAutomaton ha = build_cardiac(cfg);
  const auto run = simulate_hybrid(ha, cardiac::kLoc1Stim, {0, 0, 50, 5, 0}, {}, 400);
  for (const auto& s : run) {
    CHECK(ha.locations[s.location].id.rfind("loc1", 0) == 0);
    CHECK(s.x[cardiac::kU] == 0.0);
  }
}
