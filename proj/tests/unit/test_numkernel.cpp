#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "polyreach/combinatorics.hpp"
#include "polyreach/error.hpp"
#include "polyreach/numkernel.hpp"
#include "polyreach/sampling.hpp"

using namespace polyreach;

TEST_CASE("solve_dense on the worked normal equations") {
  const auto z = solve_dense({{{2.2, 3.0}, {3.0, 6.0}}, {4.34, 7.40}});
  CHECK(z[0] == doctest::Approx(0.9143).epsilon(1e-4));
  CHECK(z[1] == doctest::Approx(0.7762).epsilon(1e-4));
}

TEST_CASE("solve_dense identity and residual") {
  const auto x = solve_dense({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {3, -2, 5}});
  CHECK(x == std::vector<double>{3, -2, 5});

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Matrix a(5, std::vector<double>(5));
    std::vector<double> b(5);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) a[i][j] = uniform(rng, -1.0, 1.0) + (i == j ? 6.0 : 0.0);
      b[i] = uniform(rng, -10.0, 10.0);
    }
    const auto x5 = solve_dense({a, b});
    for (int i = 0; i < 5; ++i) {
      double r = -b[i];
      for (int j = 0; j < 5; ++j) r += a[i][j] * x5[j];
      CHECK(std::abs(r) <= 1e-10);
    }
  }
}

TEST_CASE("solve_dense rejects singular systems") {
  try {
    solve_dense({{{1, 2}, {2, 4}}, {1, 2}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularSystem);
  }
}

TEST_CASE("lp_solve small programs") {
  LinearProgram one(1);
  one.set_objective({1.0});
  one.add_bounds(0, 0.0, 1.0);
  const auto s = lp_solve(one);
  CHECK(s.value == doctest::Approx(1.0));
  CHECK(s.point[0] == doctest::Approx(1.0));

  LinearProgram tri(2);
  tri.set_objective({1.0, 1.0});
  tri.add_le({1.0, 1.0}, 1.0);
  tri.add_ge({1.0, 0.0}, 0.0);
  tri.add_ge({0.0, 1.0}, 0.0);
  CHECK(lp_solve(tri).value == doctest::Approx(1.0));
}

TEST_CASE("lp_solve reports infeasible and unbounded programs") {
  LinearProgram inf(1);
  inf.set_objective({1.0});
  inf.add_le({1.0}, -1.0);
  inf.add_ge({1.0}, 0.0);
  CHECK_THROWS_AS(lp_solve(inf), Error);

  LinearProgram unb(1);
  unb.set_objective({1.0});
  unb.add_ge({1.0}, 0.0);
  try {
    lp_solve(unb);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unbounded);
  }
}

TEST_CASE("lp_solve agrees with vertex enumeration") {
  Rng rng(17);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const int extra = static_cast<int>(rng() % 3);
    LinearProgram lp(n);
    Matrix rows;
    std::vector<double> rhs;
    for (int k = 0; k < n; ++k) {
      std::vector<double> lo(n, 0.0), hi(n, 0.0);
      lo[k] = -1.0;
      hi[k] = 1.0;
      rows.push_back(lo);
      rhs.push_back(uniform(rng, 0.5, 2.0));
      rows.push_back(hi);
      rhs.push_back(uniform(rng, 0.5, 2.0));
    }
    for (int e = 0; e < extra; ++e) {
      std::vector<double> r(n);
      for (auto& v : r) v = uniform(rng, -1.0, 1.0);
      rows.push_back(r);
      rhs.push_back(uniform(rng, 0.2, 1.0));
    }
    std::vector<double> c(n);
    for (auto& v : c) v = uniform(rng, -1.0, 1.0);
    for (std::size_t i = 0; i < rows.size(); ++i) lp.add_le(rows[i], rhs[i]);
    lp.set_objective(c);
    const double value = lp_solve(lp).value;

    double best = -1e300;
    for (const auto& subset : subsets_of_size(static_cast<int>(rows.size()), n)) {
      DenseLinearSystem sys;
      for (int i : subset) {
        sys.matrix.push_back(rows[i]);
        sys.rhs.push_back(rhs[i]);
      }
      std::vector<double> x;
      try {
        x = solve_dense(sys);
      } catch (const Error&) {
        continue;
      }
      bool feasible = true;
      for (std::size_t i = 0; i < rows.size() && feasible; ++i) {
        double lhs = 0.0;
        for (int k = 0; k < n; ++k) lhs += rows[i][k] * x[k];
        feasible = lhs <= rhs[i] + 1e-9;
      }
      if (!feasible) continue;
      double obj = 0.0;
      for (int k = 0; k < n; ++k) obj += c[k] * x[k];
      best = std::max(best, obj);
    }
    CHECK(std::abs(value - best) <= 1e-8);
  }
}

TEST_CASE("binomial and subsets") {
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(3, 4) == 0);
  CHECK(subsets_of_size(4, 2).size() == 6);
}
