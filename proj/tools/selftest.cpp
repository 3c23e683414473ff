#include "selftest.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "polyreach/bernstein.hpp"
#include "polyreach/reach.hpp"
#include "polyreach/sampling.hpp"

namespace polyreach::cli {

namespace {

struct Report {
  int failed = 0;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("%s  %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.empty() ? "" : "  ", detail.c_str());
    if (!ok) ++failed;
  }
};

ParamPoly worked_example() {
  const ParamPoly x = ParamPoly::variable(1, 1, 0);
  const ParamPoly p = ParamPoly::parameter(1, 1, 0);
  const ParamPoly one = ParamPoly::constant(1, 1, 1.0);
  const ParamPoly x2 = x * x;
  const ParamPoly x3 = x2 * x;
  const ParamPoly x4 = x3 * x;
  const ParamPoly x5 = x4 * x;
  return p * (one - x + 2.0 * x4) + 3.0 * x2 - x3 - 2.5 * x5;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

int run_selftest(std::uint64_t seed) {
  Report r;
  const ParamPoly pi = worked_example();
  const BernsteinForm form = bernstein_coefficients(pi);
  const double want_c[] = {0.0, 0.0, 0.3, 0.8, 1.4, -0.5};
  const double want_g[] = {1.0, 0.8, 0.6, 0.4, 0.6, 2.0};
  double coeff_err = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    coeff_err = std::max(coeff_err, std::abs(form.coeffs[i].constant - want_c[i]));
    coeff_err = std::max(coeff_err, std::abs(form.coeffs[i].grad[0] - want_g[i]));
  }
  r.check("bernstein coefficients b(p)", form.size() == 6 && coeff_err <= 1e-12, fmt("max error %.3g", coeff_err));

  const double want_b1[] = {1.0, 0.8, 0.9, 1.2, 2.0, 1.5};
  double b1_err = 0.0;
  for (std::size_t i = 0; i < 6; ++i) b1_err = std::max(b1_err, std::abs(form.coeffs[i].eval(std::vector{1.0}) - want_b1[i]));
  r.check("b(1)", b1_err <= 1e-12, fmt("max error %.3g", b1_err));

  const Matrix a = control_matrix(form.degree);
  bool a_ok = a.size() == 6;
  for (std::size_t i = 0; a_ok && i < 6; ++i) a_ok = std::abs(a[i][0] - 0.2 * i) <= 1e-15 && a[i][1] == 1.0;
  r.check("control matrix", a_ok);

  const ParamSet params(Box({0.5}, {1.5}));
  const AffineBound fit = fit_affine_bounds(form, params);
  r.check("zeta", std::abs(fit.zeta[0] - 0.9143) <= 1e-3 && std::abs(fit.zeta[1] - 0.7762) <= 1e-3,
          fmt("(%.4f, %.4f)", fit.zeta[0], fit.zeta[1]));
  r.check("delta", std::abs(fit.delta_lower - 1.1905) <= 1e-3, fmt("%.4f", fit.delta_lower));
  const double l0 = fit.lower(std::vector{0.0});
  const double slope = fit.lower(std::vector{1.0}) - l0;
  r.check("lower bound l(x)", std::abs(slope - 0.9143) <= 1e-3 && std::abs(l0 + 0.4143) <= 1e-3,
          fmt("%.4f x %+.4f", slope, l0));

  Rng rng(seed);
  std::size_t violations = 0;
  for (int t = 0; t < 20; ++t) {
    const ParamPoly q = random_poly(rng, 2, 1, 3);
    const ParamSet ps(random_box(rng, 1, 1.0, 0.1, 1.0));
    const AffineBound b = fit_affine_bounds(bernstein_coefficients(q), ps);
    for (int s = 0; s < 500; ++s) {
      const Point y = sample_box(rng, Box::unit(2));
      const Point p = sample_box(rng, *ps.box());
      const double v = q.eval(y, p);
      if (b.lower(y) - 1e-9 > v || v > b.upper(y) + 1e-9) ++violations;
    }
  }
  r.check("bound sandwich (20 random polynomials)", violations == 0, std::to_string(violations) + " violations");

  violations = 0;
  for (int t = 0; t < 20; ++t) {
    DiscreteSystem sys;
    for (int k = 0; k < 3; ++k) sys.dynamics.push_back(random_multiaffine(rng, 3, 1));
    sys.params = ParamSet(random_box(rng, 1, 1.0, 0.0, 1.0));
    const Box x = random_box(rng, 3, 2.0, 0.0, 1.0);
    const Box img = image_multiaffine(x, sys);
    const Box bimg = set_bounding_box(image_bernstein(TemplatePolyhedron::from_box(x), sys, box_template(3)));
    for (int s = 0; s < 200; ++s) {
      const Point px = sample_box(rng, x);
      const Point pp = sample_box(rng, *sys.params.box());
      const auto y = eval(sys.dynamics, px, pp);
      if (!img.contains(y, 1e-7) || !bimg.contains(y, 1e-7)) ++violations;
    }
  }
  r.check("one-step soundness (20 random multi-affine systems)", violations == 0,
          std::to_string(violations) + " violations");

  std::printf("%s\n", r.failed == 0 ? "selftest passed" : "selftest FAILED");
  return r.failed == 0 ? 0 : 1;
}

}  // namespace polyreach::cli
