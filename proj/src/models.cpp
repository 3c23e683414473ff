#include "polyreach/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace polyreach {

namespace {

// c * prod_k x_k^{e_k} + g . p * prod_k x_k^{e_k}
void add(ParamPoly& poly, MultiIndex exps, double c, std::vector<double> g = {}) {
  g.resize(poly.n_params(), 0.0);
  poly.add_term(exps, AffineCoeff(c, std::move(g)));
}

MultiIndex mono(std::size_t n, std::initializer_list<std::size_t> axes) {
  MultiIndex e(n, 0);
  for (std::size_t k : axes) ++e[k];
  return e;
}

std::vector<double> axis_row(std::size_t n, std::size_t axis, double sign) {
  std::vector<double> row(n, 0.0);
  row[axis] = sign;
  return row;
}

TemplatePolyhedron half_space(std::size_t n, std::size_t axis, double sign, double rhs) {
  return TemplatePolyhedron({axis_row(n, axis, sign)}, {rhs});
}

}  // namespace

// ---------------------------------------------------------------------------
// Honeybees

void BeesConfig::validate() const {
  for (double r : {alpha, beta1, beta2_lo, beta2_hi, gamma, delta}) {
    require(std::isfinite(r) && r >= 0.0, ErrorKind::InvalidInput, "bee rates must be non-negative");
  }
  require(beta2_lo <= beta2_hi, ErrorKind::InvalidInput, "beta2 interval is reversed");
  require(std::isfinite(h) && h > 0.0, ErrorKind::InvalidInput, "Euler step must be positive");
  require(std::isfinite(N) && N > 0.0, ErrorKind::InvalidInput, "population must be positive");
  require(discovery_seed >= 0.0, ErrorKind::InvalidInput, "discovery seed must be non-negative");
  require(initial_half_width >= 0.0, ErrorKind::InvalidInput, "initial half-width must be non-negative");
  const Box b = initial_box();
  require(b.dim() == 5, ErrorKind::DimensionMismatch, "bee initial box must be 5-dimensional");
  require(Box(std::vector<double>(5, 0.0), std::vector<double>(5, N)).contains(b), ErrorKind::InvalidInput,
          "bee initial box must lie in [0, N]^5");
}

Box BeesConfig::initial_box() const {
  if (initial) return *initial;
  std::vector<double> lo(5, 0.0), hi(5, 0.0);
  lo[bees::kX] = std::max(0.0, N - initial_half_width);
  hi[bees::kX] = N;
  hi[bees::kY1] = std::min(N, initial_half_width);
  return Box(lo, hi);
}

BeesModel build_bees(const BeesConfig& cfg) {
  cfg.validate();
  using namespace bees;
  const std::size_t n = 5;
  const double scale = cfg.per_capita_rates ? 1.0 / cfg.N : 1.0;
  const double b1 = cfg.beta1 * scale;
  const double a = cfg.alpha;
  const double g = cfg.gamma;
  const double d = cfg.delta;

  PolyVector f(n, ParamPoly(n, 1));
  // beta2 is the parameter p; its terms carry the rate in the gradient.
  add(f[kX], mono(n, {kX, kY1}), -b1);
  add(f[kX], mono(n, {kX, kY2}), 0.0, {-1.0});

  add(f[kY1], mono(n, {kX, kY1}), b1);
  add(f[kY1], mono(n, {kY1}), -g);
  add(f[kY1], mono(n, {kY1, kZ1}), d * b1);
  add(f[kY1], mono(n, {kY1, kZ2}), a * b1);

  add(f[kY2], mono(n, {kX, kY2}), 0.0, {1.0});
  add(f[kY2], mono(n, {kY2}), -g);
  add(f[kY2], mono(n, {kY2, kZ2}), 0.0, {d});
  add(f[kY2], mono(n, {kY2, kZ1}), 0.0, {a});

  add(f[kZ1], mono(n, {kY1}), g);
  add(f[kZ1], mono(n, {kY1, kZ1}), -d * b1);
  add(f[kZ1], mono(n, {kY2, kZ1}), 0.0, {-a});

  add(f[kZ2], mono(n, {kY2}), g);
  if (cfg.z2_form == Z2Form::Conserving) {
    add(f[kZ2], mono(n, {kY2, kZ2}), 0.0, {-d});
    add(f[kZ2], mono(n, {kY1, kZ2}), -a * b1);
  } else {
    add(f[kZ2], mono(n, {kY2, kZ2}), -d * b1);
    add(f[kZ2], mono(n, {kY1, kZ2}), 0.0, {-a});
  }

  const Box beta2(std::vector<double>{cfg.beta2_lo * scale}, std::vector<double>{cfg.beta2_hi * scale});
  BeesModel model{DiscreteSystem::from_field(std::move(f), cfg.h, ParamSet(beta2)), cfg.initial_box()};

  if (cfg.discovery_seed > 0.0) {
    std::vector<double> shift(n, 0.0);
    shift[kX] = -cfg.discovery_seed;
    shift[kY2] = cfg.discovery_seed;
    model.system.events.push_back({cfg.discovery_step, shift});
  }

  if (cfg.conservation_invariant) {
    require(cfg.z2_form == Z2Form::Conserving, ErrorKind::InvalidInput,
            "the conservation invariant needs the conserving Z2 equation");
    // Each Euler factor stays in [0, 1] when these hold, which keeps every
    // coordinate non-negative along trajectories inside [0, N]^5.
    const double total = cfg.N * std::max(b1, cfg.beta2_hi * scale) * std::max({1.0, a, d});
    require(cfg.h * total <= 1.0 && cfg.h * cfg.gamma <= 1.0, ErrorKind::InvalidInput,
            "Euler step too large for the positivity invariant");
    const Box& x0 = model.initial;
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      lo += x0.lower[k];
      hi += x0.upper[k];
    }
    Matrix rows;
    std::vector<double> c;
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> r(n, 0.0);
      r[k] = -1.0;
      rows.push_back(r);
      c.push_back(0.0);
    }
    rows.emplace_back(n, 1.0);
    c.push_back(hi);
    rows.emplace_back(n, -1.0);
    c.push_back(-lo);
    model.system.invariant = TemplatePolyhedron(std::move(rows), std::move(c));
  }
  return model;
}

std::string_view to_string(ConsensusKind kind) {
  switch (kind) {
    case ConsensusKind::Site1:
      return "consensus-site-1";
    case ConsensusKind::Site2:
      return "consensus-site-2";
    case ConsensusKind::None:
      break;
  }
  return "no-consensus";
}

Interval site_share(const ReachSet& set, int site, double N) {
  require(set_dim(set) == 5, ErrorKind::DimensionMismatch, "bee sets are 5-dimensional");
  require(site == 1 || site == 2, ErrorKind::InvalidInput, "site must be 1 or 2");
  const std::size_t y = site == 1 ? bees::kY1 : bees::kY2;
  const std::size_t z = site == 1 ? bees::kZ1 : bees::kZ2;
  if (const auto* b = std::get_if<Box>(&set)) {
    return {(b->lower[y] + b->lower[z]) / N, (b->upper[y] + b->upper[z]) / N};
  }
  const auto& p = std::get<TemplatePolyhedron>(set);
  std::vector<double> dir(5, 0.0);
  dir[y] = dir[z] = 1.0;
  const double hi = support(p, dir);
  dir[y] = dir[z] = -1.0;
  const double lo = -support(p, dir);
  return {lo / N, hi / N};
}

ConsensusVerdict consensus_metric(const ReachTrace& trace, const ConsensusOptions& opts) {
  require(trace.dim == 5, ErrorKind::DimensionMismatch, "consensus needs a 5-dimensional bee trace");
  require(opts.threshold > 0.0 && opts.threshold < 1.0, ErrorKind::InvalidInput, "threshold must lie in (0, 1)");
  require(opts.window >= 2, ErrorKind::InvalidInput, "window must be at least 2");
  require(!trace.entries.empty(), ErrorKind::InvalidInput, "empty trace");

  ConsensusVerdict v;
  for (const auto& e : trace.entries) {
    const Interval s1 = site_share(e.set, 1, opts.N);
    const Interval s2 = site_share(e.set, 2, opts.N);
    double gap = 0.0;
    if (s1.lo > s2.hi) {
      gap = s1.lo - s2.hi;
    } else if (s2.lo > s1.hi) {
      gap = -(s2.lo - s1.hi);
    }
    v.gaps.push_back(gap);
  }
  const std::size_t last = v.gaps.size() - 1;
  const std::size_t w = std::min(opts.window, last);
  v.final_gap = v.gaps[last];
  v.gap_trend = w == 0 ? 0.0 : (std::abs(v.gaps[last]) - std::abs(v.gaps[last - w])) / static_cast<double>(w);
  if (std::abs(v.final_gap) >= opts.threshold && v.gap_trend > 0.0) {
    v.kind = v.final_gap > 0.0 ? ConsensusKind::Site1 : ConsensusKind::Site2;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Cardiac cell

void CardiacConfig::validate() const {
  require(std::isfinite(h) && h > 0.0, ErrorKind::InvalidInput, "Euler step must be positive");
  require(0.0 < guard12 && guard12 < guard23, ErrorKind::InvalidInput, "guards must satisfy 0 < guard12 < guard23");
  require(e_amp >= 0.0 && stim_cutoff > 0.0, ErrorKind::InvalidInput, "stimulus must be non-negative");
  require(1.0 <= g1_lo && g1_lo <= g1_hi && 1.0 <= g2_lo && g2_lo <= g2_hi, ErrorKind::InvalidInput,
          "conductance ranges must be ordered and at least 1");
  require(h * std::max(g1_hi, g2_hi) < 1.0, ErrorKind::InvalidInput,
          "Euler step too large for the conductance range");
  require(u0 >= 0.0 && u0 <= e_amp && v0 >= 0.0 && v0 <= 1.0, ErrorKind::InvalidInput,
          "initial state outside the physical range");
}

std::size_t CardiacConfig::horizon() const {
  return static_cast<std::size_t>(std::ceil(stim_cutoff / h)) + 5;
}

HybridAutomaton build_cardiac(const CardiacConfig& cfg) {
  cfg.validate();
  using namespace cardiac;
  const std::size_t n = 5;
  const double margin = 2.0 * cfg.h * cfg.e_amp;
  const double inf = std::numeric_limits<double>::infinity();

  auto field = [&](bool loc1, double e) {
    PolyVector f(n, ParamPoly(n, 0));
    const std::size_t g = loc1 ? kG1 : kG2;
    if (e != 0.0) add(f[kU], mono(n, {}), e);
    add(f[kU], mono(n, {kU, g}), -1.0);
    if (loc1) {
      add(f[kV], mono(n, {kG1}), 1.0);
      add(f[kV], mono(n, {kV, kG1}), -1.0);
    } else {
      add(f[kV], mono(n, {kV, kG2}), -1.0);
    }
    add(f[kT], mono(n, {}), 1.0);
    return f;
  };

  // Box invariant from per-axis bounds; infinite bounds are omitted.
  auto box_rows = [&](std::vector<double> lo, std::vector<double> hi) {
    Matrix rows;
    std::vector<double> c;
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> r(n, 0.0);
      if (std::isfinite(hi[k])) {
        r[k] = 1.0;
        rows.push_back(r);
        c.push_back(hi[k]);
      }
      if (std::isfinite(lo[k])) {
        r[k] = -1.0;
        rows.push_back(r);
        c.push_back(-lo[k]);
      }
    }
    return TemplatePolyhedron(std::move(rows), std::move(c));
  };
  auto invariant = [&](double u_hi, bool stim) {
    std::vector<double> lo = {0.0, 0.0, cfg.g1_lo, cfg.g2_lo, stim ? 0.0 : cfg.stim_cutoff};
    std::vector<double> hi = {std::min(u_hi, cfg.e_amp), 1.0, cfg.g1_hi, cfg.g2_hi,
                              stim ? cfg.stim_cutoff + 2.0 * cfg.h : inf};
    return box_rows(lo, hi);
  };

  const double u1 = cfg.guard12 + margin;
  const double u2 = cfg.guard23 + margin;
  HybridAutomaton ha;
  auto loc = [&](const std::string& id, bool loc1, double e, double u_hi, bool stim) {
    ha.locations.push_back({id, DiscreteSystem::from_field(field(loc1, e), cfg.h, ParamSet()), invariant(u_hi, stim)});
  };
  loc(kLoc1Stim, true, cfg.e_amp, u1, true);
  loc(kLoc1Rest, true, 0.0, u1, false);
  loc(kLoc2Stim, false, cfg.e_amp, u2, true);
  loc(kLoc2Rest, false, 0.0, u2, false);
  ha.locations.push_back({kLoc3, DiscreteSystem::from_field(PolyVector(n, ParamPoly(n, 0)), cfg.h, ParamSet()),
                          std::nullopt});

  const auto u_ge12 = half_space(n, kU, -1.0, -cfg.guard12);
  const auto u_ge23 = half_space(n, kU, -1.0, -cfg.guard23);
  const auto t_ge = half_space(n, kT, -1.0, -cfg.stim_cutoff);
  ha.transitions = {
      {kLoc1Stim, kLoc2Stim, u_ge12}, {kLoc1Stim, kLoc1Rest, t_ge}, {kLoc1Rest, kLoc2Rest, u_ge12},
      {kLoc2Stim, kLoc3, u_ge23},     {kLoc2Stim, kLoc2Rest, t_ge}, {kLoc2Rest, kLoc3, u_ge23},
  };

  ha.initial.push_back({kLoc1Stim, Box({cfg.u0, cfg.v0, cfg.g1_lo, cfg.g2_lo, 0.0},
                                       {cfg.u0, cfg.v0, cfg.g1_hi, cfg.g2_hi, 0.0})});
  // A first visit of loc2 with u >= guard23 happens under the stimulus: u
  // only decays once e = 0, and loc1 never holds u above guard12 + margin.
  // u never exceeds e_amp, so a higher guard leaves nothing unsafe.
  if (cfg.guard23 <= cfg.e_amp) {
    ha.unsafe.push_back({kLoc2Stim, Box({cfg.guard23, 0.0, cfg.g1_lo, cfg.g2_lo, 0.0},
                                        {std::min(u2, cfg.e_amp), 1.0, cfg.g1_hi, cfg.g2_hi,
                                         cfg.stim_cutoff + 2.0 * cfg.h})});
  }
  ha.validate();
  return ha;
}

}  // namespace polyreach
