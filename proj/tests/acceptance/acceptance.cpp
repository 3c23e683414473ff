// One line per acceptance criterion. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "polyreach/bernstein.hpp"
#include "polyreach/combinatorics.hpp"
#include "polyreach/io.hpp"
#include "polyreach/sampling.hpp"

using namespace polyreach;

namespace {

std::string g_models = POLYREACH_MODELS_DIR;
int g_failed = 0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %d %s  %s  %s\n", id, ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ParamPoly worked_example() {
  const ParamPoly x = ParamPoly::variable(1, 1, 0);
  const ParamPoly p = ParamPoly::parameter(1, 1, 0);
  const ParamPoly one = ParamPoly::constant(1, 1, 1.0);
  const ParamPoly x2 = x * x;
  return p * (one - x + 2.0 * (x2 * x2)) + 3.0 * x2 - x2 * x - 2.5 * (x2 * x2 * x);
}

// ---------------------------------------------------------------------------

void golden_example() {
  const auto t0 = Clock::now();
  const BernsteinForm form = bernstein_coefficients(worked_example());
  const double want_c[] = {0.0, 0.0, 0.3, 0.8, 1.4, -0.5};
  const double want_g[] = {1.0, 0.8, 0.6, 0.4, 0.6, 2.0};
  double coeff_err = form.size() == 6 ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min<std::size_t>(6, form.size()); ++i) {
    coeff_err = std::max({coeff_err, std::abs(form.coeffs[i].constant - want_c[i]),
                          std::abs(form.coeffs[i].grad[0] - want_g[i])});
  }
  const AffineBound fit = fit_affine_bounds(form, ParamSet(Box({0.5}, {1.5})));
  const double l0 = fit.lower(std::vector{0.0});
  const double l_slope = fit.lower(std::vector{1.0}) - l0;
  const double secs = seconds_since(t0);
  const bool ok = coeff_err <= 1e-12 && std::abs(fit.zeta[0] - 0.9143) <= 1e-3 &&
                  std::abs(fit.zeta[1] - 0.7762) <= 1e-3 && std::abs(fit.delta_lower - 1.1905) <= 1e-3 &&
                  std::abs(l_slope - 0.9143) <= 1e-3 && std::abs(l0 + 0.4143) <= 1e-3 && secs < 1.0;
  report(1, "golden worked example", ok,
         fmt("coeff err %.2e (tol 1e-12), zeta (%.5f, %.5f), delta %.5f, l(x) = %.5f x %+.5f (tol 1e-3), %.4f s (< 1 s)",
             coeff_err, fit.zeta[0], fit.zeta[1], fit.delta_lower, l_slope, l0, secs));
}

void bound_soundness() {
  Rng rng(1001);
  std::uniform_int_distribution<int> dim(1, 3), pdim(0, 2);
  std::size_t violations = 0, samples = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = dim(rng);
    const std::size_t m = pdim(rng);
    const ParamPoly pi = random_poly(rng, n, m, 4);
    const Box pb = random_box(rng, m, 2.0, 0.0, 1.5);
    const AffineBound b = fit_affine_bounds(bernstein_coefficients(pi), ParamSet(pb));
    for (int s = 0; s < 10000; ++s) {
      const Point x = sample_box(rng, Box::unit(n));
      const Point p = sample_box(rng, pb);
      const double v = pi.eval(x, p);
      const double miss = std::max(b.lower(x) - v, v - b.upper(x));
      worst = std::max(worst, miss);
      if (miss > 1e-9) ++violations;
      ++samples;
    }
  }
  report(2, "bound soundness", violations == 0,
         fmt("%zu violations in %zu samples over 200 polynomials, worst excess %.3e (tol 1e-9)", violations, samples,
             worst));
}

bool in_hull(const std::vector<Point>& verts, const Point& y, double tol) {
  const std::size_t v = verts.size();
  LinearProgram lp(v);
  lp.set_objective(std::vector<double>(v, 0.0));
  for (std::size_t i = 0; i < v; ++i) {
    std::vector<double> e(v, 0.0);
    e[i] = 1.0;
    lp.add_ge(e, 0.0);
  }
  lp.add_eq(std::vector<double>(v, 1.0), 1.0);
  for (std::size_t k = 0; k < y.size(); ++k) {
    std::vector<double> row(v);
    for (std::size_t i = 0; i < v; ++i) row[i] = verts[i][k];
    lp.add_le(row, y[k] + tol);
    lp.add_ge(row, y[k] - tol);
  }
  try {
    lp_solve(lp);
    return true;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Infeasible) return false;
    throw;
  }
}

void multiaffine_hull() {
  Rng rng(1002);
  std::uniform_int_distribution<int> dim(1, 4), pdim(0, 1);
  std::size_t violations = 0, checks = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = dim(rng);
    const std::size_t m = pdim(rng);
    PolyVector f;
    for (std::size_t k = 0; k < n; ++k) f.push_back(random_multiaffine(rng, n, m));
    const Box x = random_box(rng, n, 2.0, 0.1, 1.5);
    const Box pb = random_box(rng, m, 1.0, 0.0, 1.0);
    std::vector<Point> images;
    for (const auto& xv : box_vertices(x)) {
      for (const auto& pv : box_vertices(pb)) images.push_back(eval(f, xv, pv));
    }
    for (int s = 0; s < 50; ++s) {
      const Point y = eval(f, sample_box(rng, x), sample_box(rng, pb));
      if (!in_hull(images, y, 1e-7)) ++violations;
      ++checks;
    }
  }
  report(3, "multi-affine vertex hull", violations == 0,
         fmt("%zu of %zu sampled images outside the vertex-image hull LP (tol 1e-7), 100 systems, n <= 4",
             violations, checks));
}

struct Containment {
  std::size_t violations = 0;
  std::size_t checks = 0;
  double worst = 0.0;
};

double box_excess(const Box& b, const Point& x) {
  double e = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) e = std::max({e, b.lower[k] - x[k], x[k] - b.upper[k]});
  return e;
}

void check_point(Containment& c, const ReachSet& s, const Point& x) {
  ++c.checks;
  if (set_contains(s, x, 1e-7)) return;
  ++c.violations;
  c.worst = std::max(c.worst, box_excess(set_bounding_box(s), x));
}

void trace_soundness() {
  const auto t0 = Clock::now();
  Model bees = load_model(g_models + "/bees_fig2.json");
  std::vector<std::pair<std::string, ReachTrace>> traces;
  traces.emplace_back("multiaffine", forward_reach(*bees.system, *bees.initial,
                                                   bees.strategy(StrategyKind::MultiAffine), 150));
  traces.emplace_back("bernstein/box", forward_reach(*bees.system, *bees.initial,
                                                     bees.strategy(StrategyKind::Bernstein), 150));
  bees.template_kind = "octagon";
  traces.emplace_back("bernstein/octagon", forward_reach(*bees.system, *bees.initial,
                                                         bees.strategy(StrategyKind::Bernstein), 150));
  Rng rng(1004);
  Containment bc;
  const Box x0 = set_bounding_box(*bees.initial);
  for (int s = 0; s < 100; ++s) {
    const Point p = sample_box(rng, *bees.system->params.box());
    const auto traj = simulate(*bees.system, sample_box(rng, x0), p, 150);
    for (const auto& [name, tr] : traces) {
      for (std::size_t k = 0; k <= 150; ++k) check_point(bc, tr.entries[k].set, traj[k]);
    }
  }

  const Model card = load_model(g_models + "/cardiac.json");
  const HybridAutomaton& ha = *card.hybrid;
  const ReachTrace ct = hybrid_reach(ha, card.strategy(StrategyKind::MultiAffine), card.steps);
  const Box c0 = set_bounding_box(ha.initial.front().set);
  Containment cc;
  for (int s = 0; s < 100; ++s) {
    const auto run = simulate_hybrid(ha, ha.initial.front().location, sample_box(rng, c0), {}, card.steps);
    for (std::size_t k = 0; k < run.size(); ++k) {
      const std::string& id = ha.locations[run[k].location].id;
      const TraceEntry* hit = nullptr;
      for (const TraceEntry* e : ct.at_step(k)) {
        if (e->location == id) hit = e;
      }
      if (!hit) {
        ++cc.violations;
        ++cc.checks;
        continue;
      }
      check_point(cc, hit->set, run[k].x);
    }
  }
  report(4, "trace soundness", bc.violations == 0 && cc.violations == 0,
         fmt("bees 150 steps (multiaffine, bernstein box and octagon): %zu of %zu points outside; cardiac %zu steps: "
             "%zu of %zu points outside; 100 trajectories each, tol 1e-7, %.1f s",
             bc.violations, bc.checks, card.steps, cc.violations, cc.checks, seconds_since(t0)));
}

struct Excess {
  double value = 0.0;
  std::size_t step = 0;
  std::size_t axis = 0;
  std::size_t bad_steps = 0;
};

Excess containment_excess(const ReachTrace& inner, const ReachTrace& outer, double tol,
                          const std::vector<std::size_t>& axes) {
  Excess e;
  for (std::size_t k = 0; k < outer.entries.size(); ++k) {
    const Box a = set_bounding_box(outer.entries[k].set);
    const Box b = set_bounding_box(inner.entries[k].set);
    bool bad = false;
    for (std::size_t i : axes) {
      const double d = std::max(a.lower[i] - b.lower[i], b.upper[i] - a.upper[i]);
      if (d > e.value) e = {d, k, i, e.bad_steps};
      bad = bad || d > tol;
    }
    e.bad_steps += bad;
  }
  return e;
}

void precision_ordering() {
  Model m = load_model(g_models + "/bees_fig2.json");
  const auto t0 = Clock::now();
  const ReachTrace ma = forward_reach(*m.system, *m.initial, m.strategy(StrategyKind::MultiAffine), 150);
  const double ma_s = seconds_since(t0);
  const ReachTrace box = forward_reach(*m.system, *m.initial, m.strategy(StrategyKind::Bernstein), 150);
  m.template_kind = "octagon";
  const auto t1 = Clock::now();
  const ReachTrace oct = forward_reach(*m.system, *m.initial, m.strategy(StrategyKind::Bernstein), 150);
  const double oct_s = seconds_since(t1);

  const std::vector<std::size_t> all = {0, 1, 2, 3, 4};
  const Excess eo = containment_excess(oct, ma, 1e-6, all);
  const Excess eb = containment_excess(box, ma, 1e-6, all);
  const Excess ey = containment_excess(oct, ma, 1e-6, {bees::kY1, bees::kY2});
  report(5, "bernstein boxes inside multi-affine boxes", eo.bad_steps == 0,
         fmt("octagon template: %zu of 151 steps exceed tol 1e-6, max excess %.3e on %s at step %zu; "
             "box template: max excess %.3e on %s at step %zu; (Y1,Y2) only, octagon: max excess %.3e; "
             "times multiaffine %.3f s, bernstein/octagon %.3f s",
             eo.bad_steps, eo.value, bees::kVariables[eo.axis].c_str(), eo.step, eb.value,
             bees::kVariables[eb.axis].c_str(), eb.step, ey.value, ma_s, oct_s));
}

void bees_verdicts() {
  struct Case {
    const char* file;
    ConsensusKind want;
  };
  const Case cases[] = {{"bees_fig2.json", ConsensusKind::None},
                        {"bees_fig3.json", ConsensusKind::Site2},
                        {"bees_fig4.json", ConsensusKind::Site1}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const Model m = load_model(g_models + "/" + c.file);
    const auto t0 = Clock::now();
    const ReachTrace tr = forward_reach(*m.system, *m.initial, m.strategy(StrategyKind::MultiAffine), 6000);
    const double secs = seconds_since(t0);
    const ConsensusVerdict v = consensus_metric(tr, m.consensus.value_or(ConsensusOptions{}));
    const Box last = set_bounding_box(tr.entries.back().set);
    const bool hit = v.kind == c.want && secs <= 60.0;
    ok = ok && hit;
    detail += fmt("%s: %s (want %s), gap %.4f, trend %.2e, Y1 in [%.1f, %.1f], Y2 in [%.1f, %.1f], %.1f s; ",
                  m.name.c_str(), std::string(to_string(v.kind)).c_str(), std::string(to_string(c.want)).c_str(),
                  v.final_gap, v.gap_trend, last.lower[bees::kY1], last.upper[bees::kY1], last.lower[bees::kY2],
                  last.upper[bees::kY2], secs);
  }
  detail += "threshold 0.3, window 500, 6000 steps, time limit 60 s";
  report(6, "bees consensus verdicts", ok, detail);
}

bool reaches_unsafe(const HybridAutomaton& ha, const CardiacConfig& cfg, double g1, double g2, std::size_t steps) {
  const auto run = simulate_hybrid(ha, cardiac::kLoc1Stim, {cfg.u0, cfg.v0, g1, g2, 0.0}, {}, steps);
  for (const auto& s : run) {
    const std::string& id = ha.locations[s.location].id;
    if ((id == cardiac::kLoc2Stim || id == cardiac::kLoc2Rest) && s.x[cardiac::kU] >= cfg.guard23) return true;
  }
  return false;
}

void cardiac_region() {
  const Model m = load_model(g_models + "/cardiac.json");
  const CardiacConfig cfg;
  const HybridAutomaton& ha = *m.hybrid;
  const RegionSpec& reg = *m.region;
  RegionQuery q;
  q.axis_a = m.axis(reg.axes[0]);
  q.axis_b = m.axis(reg.axes[1]);
  for (const auto& [axis, value] : reg.fixes) q.fixes.push_back({m.axis(axis), value});
  q.locations = reg.locations;
  const auto t0 = Clock::now();
  const RegionRun r =
      param_region(ha, q, reg.split[0], reg.split[1], m.strategy(StrategyKind::MultiAffine), m.steps);
  const double secs = seconds_since(t0);

  std::size_t unsafe = 0, misses = 0, covered = 0;
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      const double g1 = cfg.g1_lo + (cfg.g1_hi - cfg.g1_lo) * i / 39.0;
      const double g2 = cfg.g2_lo + (cfg.g2_hi - cfg.g2_lo) * j / 39.0;
      const std::vector<double> pt = {g1, g2};
      const bool inside = std::any_of(r.boxes.begin(), r.boxes.end(),
                                      [&](const Box& b) { return b.contains(pt, 1e-9); });
      covered += inside;
      if (!reaches_unsafe(ha, cfg, g1, g2, m.steps + 50)) continue;
      ++unsafe;
      misses += !inside;
    }
  }
  report(7, "cardiac parameter region", misses == 0 && !r.boxes.empty(),
         fmt("%zu misses among %zu unsafe grid points (40x40), region of %zu boxes from %zux%zu cells covers %zu grid "
             "points, %.1f s",
             misses, unsafe, r.boxes.size(), reg.split[0], reg.split[1], covered, secs));
}

void template_oracle() {
  Rng rng(1008);
  const Matrix h = octagon_template(2);
  std::size_t violations = 0, rows = 0, within_slack = 0;
  double worst = -INFINITY, max_gap = 0.0;
  for (int t = 0; t < 50; ++t) {
    DiscreteSystem sys;
    sys.dynamics = {random_poly(rng, 2, 1, 2), random_poly(rng, 2, 1, 2)};
    const Box pb = random_box(rng, 1, 1.0, 0.0, 1.0);
    sys.params = ParamSet(pb);
    const Box x = random_box(rng, 2, 2.0, 0.1, 1.5);
    const TemplatePolyhedron img = image_bernstein(TemplatePolyhedron::from_box(x), sys, h);
    const AffineMap tau = unit_to_box_map(x);
    for (std::size_t i = 0; i < h.size(); ++i) {
      const ParamPoly sigma = linear_combination(sys.dynamics, h[i]);
      double grid_max = -INFINITY;
      for (int a = 0; a < 200; ++a) {
        for (int b = 0; b < 200; ++b) {
          const std::vector<double> pt = {x.lower[0] + x.width(0) * a / 199.0, x.lower[1] + x.width(1) * b / 199.0};
          for (const auto& pv : box_vertices(pb)) grid_max = std::max(grid_max, sigma.eval(pt, pv));
        }
      }
      const AffineBound fit = fit_affine_bounds(bernstein_coefficients(compose_box(sigma, tau)), sys.params);
      const double gap = img.c()[i] - grid_max;
      ++rows;
      if (gap < -1e-9) ++violations;
      worst = std::max(worst, -gap);
      max_gap = std::max(max_gap, gap);
      within_slack += gap <= fit.delta_upper + fit.delta_lower + 1e-9;
    }
  }
  report(8, "template coefficients vs grid maximum", violations == 0,
         fmt("%zu of %zu octagon coefficients below the 200x200 grid maximum (tol 1e-9); "
             "largest overshoot %.3e; %zu of %zu within the fit's delta slack (reported)",
             violations, rows, max_gap, within_slack, rows));
}

void numerical_kernel() {
  Rng rng(1009);
  std::uniform_int_distribution<int> dim(1, 8);
  std::size_t dense_bad = 0;
  double worst_ratio = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = dim(rng);
    DenseLinearSystem sys;
    sys.matrix.assign(n, std::vector<double>(n));
    sys.rhs.resize(n);
    double rhs_norm = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) sys.matrix[i][j] = uniform(rng, -1.0, 1.0) + (i == j ? n : 0.0);
      sys.rhs[i] = uniform(rng, -100.0, 100.0);
      rhs_norm = std::max(rhs_norm, std::abs(sys.rhs[i]));
    }
    const auto x = solve_dense(sys);
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = -sys.rhs[i];
      for (int j = 0; j < n; ++j) r += sys.matrix[i][j] * x[j];
      res = std::max(res, std::abs(r));
    }
    const double bound = 1e-8 * (1.0 + rhs_norm);
    worst_ratio = std::max(worst_ratio, res / bound);
    dense_bad += res > bound;
  }

  std::size_t lp_bad = 0;
  double worst_gap = 0.0;
  std::uniform_int_distribution<int> lpdim(1, 4);
  for (int t = 0; t < 200; ++t) {
    const int n = lpdim(rng);
    Matrix rows;
    std::vector<double> rhs;
    for (int k = 0; k < n; ++k) {
      for (double sign : {-1.0, 1.0}) {
        std::vector<double> r(n, 0.0);
        r[k] = sign;
        rows.push_back(r);
        rhs.push_back(uniform(rng, 0.5, 2.0));
      }
    }
    std::uniform_int_distribution<int> extra(0, 8 - 2 * n);
    for (int e = extra(rng); e > 0; --e) {
      std::vector<double> r(n);
      for (auto& v : r) v = uniform(rng, -1.0, 1.0);
      rows.push_back(r);
      rhs.push_back(uniform(rng, 0.1, 1.0));
    }
    std::vector<double> c(n);
    for (auto& v : c) v = uniform(rng, -1.0, 1.0);
    LinearProgram lp(n, (t % 2) ? Sense::Maximize : Sense::Minimize);
    lp.set_objective(c);
    for (std::size_t i = 0; i < rows.size(); ++i) lp.add_le(rows[i], rhs[i]);
    const LpSolution sol = lp_solve(lp);

    const double sign = lp.sense() == Sense::Maximize ? 1.0 : -1.0;
    double best = -INFINITY;
    for (const auto& subset : subsets_of_size(static_cast<int>(rows.size()), n)) {
      DenseLinearSystem s;
      for (int i : subset) {
        s.matrix.push_back(rows[i]);
        s.rhs.push_back(rhs[i]);
      }
      std::vector<double> v;
      try {
        v = solve_dense(s);
      } catch (const Error&) {
        continue;
      }
      bool feasible = true;
      for (std::size_t i = 0; i < rows.size() && feasible; ++i) {
        double lhs = 0.0;
        for (int k = 0; k < n; ++k) lhs += rows[i][k] * v[k];
        feasible = lhs <= rhs[i] + 1e-9;
      }
      if (!feasible) continue;
      double obj = 0.0;
      for (int k = 0; k < n; ++k) obj += c[k] * v[k];
      best = std::max(best, sign * obj);
    }
    bool point_ok = true;
    double obj = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double lhs = 0.0;
      for (int k = 0; k < n; ++k) lhs += rows[i][k] * sol.point[k];
      point_ok = point_ok && lhs <= rhs[i] + 1e-9;
    }
    for (int k = 0; k < n; ++k) obj += c[k] * sol.point[k];
    const double gap = std::abs(sign * sol.value - best);
    worst_gap = std::max(worst_gap, gap / std::max(1.0, std::abs(best)));
    lp_bad += !(point_ok && gap <= 1e-8 * std::max(1.0, std::abs(best)) && std::abs(obj - sol.value) <= 1e-9);
  }
  report(9, "numerical kernel", dense_bad == 0 && lp_bad == 0,
         fmt("solve_dense: %zu of 1000 above the residual bound 1e-8 (1 + |rhs|), worst ratio %.2e; "
             "lp_solve: %zu of 200 disagree with vertex enumeration (tol 1e-8 relative), worst gap %.2e",
             dense_bad, worst_ratio, lp_bad, worst_gap));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_models = argv[1];
  const std::pair<int, void (*)()> criteria[] = {
      {1, golden_example},     {2, bound_soundness},  {3, multiaffine_hull},
      {4, trace_soundness},    {5, precision_ordering}, {6, bees_verdicts},
      {7, cardiac_region},     {8, template_oracle},  {9, numerical_kernel},
  };
  for (const auto& [id, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, "error", false, e.what());
    }
  }
  std::printf("%d of 9 criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
