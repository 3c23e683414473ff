#include "polyreach/sampling.hpp"

namespace polyreach {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Point sample_box(Rng& rng, const Box& b) {
  Point x(b.dim());
  for (std::size_t k = 0; k < b.dim(); ++k) x[k] = b.width(k) == 0.0 ? b.lower[k] : uniform(rng, b.lower[k], b.upper[k]);
  return x;
}

Box random_box(Rng& rng, std::size_t n, double range, double min_width, double max_width) {
  std::vector<double> lo(n), hi(n);
  for (std::size_t k = 0; k < n; ++k) {
    lo[k] = uniform(rng, -range, range);
    hi[k] = lo[k] + uniform(rng, min_width, max_width);
  }
  return Box(lo, hi);
}

ParamPoly random_poly(Rng& rng, std::size_t n, std::size_t m, int max_degree) {
  std::uniform_int_distribution<int> deg(0, max_degree);
  MultiIndex bound(n);
  for (auto& d : bound) d = deg(rng);
  ParamPoly p(n, m);
  for_each_index_le(bound, [&](const MultiIndex& i) {
    AffineCoeff c(m, uniform(rng, -1.0, 1.0));
    for (auto& g : c.grad) g = uniform(rng, -1.0, 1.0);
    p.add_term(i, c);
  });
  return p;
}

ParamPoly random_multiaffine(Rng& rng, std::size_t n, std::size_t m) {
  return random_poly(rng, n, m, 1);
}

}  // namespace polyreach
