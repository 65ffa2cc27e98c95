#include "hjbi/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace hjbi {

GaussRule gauss_legendre_unit(int n) {
  require(n >= 1, "gauss_legendre_unit: need at least one point");
  GaussRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Map from [-1,1] to [0,1]; nodes come out descending, store ascending.
    const int slot = n - 1 - i;
    rule.points[slot] = 0.5 * (x + 1.0);
    rule.weights[slot] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

QuadratureRule::QuadratureRule(int volume_exactness, int edge_exactness)
    : volume_exactness_(volume_exactness), edge_exactness_(edge_exactness) {
  if (volume_exactness < 1 || edge_exactness < 1)
    fail(ErrorKind::invalid_argument, "quadrature exactness must be >= 1");
  if (volume_exactness > kMaxQuadratureExactness || edge_exactness > kMaxQuadratureExactness)
    fail(ErrorKind::invalid_argument,
         "quadrature exactness above supported maximum " + std::to_string(kMaxQuadratureExactness));

  edge_ = gauss_legendre_unit((edge_exactness + 2) / 2);

  // x = u (1 - v), y = v, dx dy = (1 - v) du dv; degree d in (x,y) becomes
  // degree d in u and d+1 in v.
  const GaussRule g = gauss_legendre_unit((volume_exactness + 3) / 2);
  const std::size_t n = g.points.size();
  tri_points_.reserve(n * n);
  tri_weights_.reserve(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    const double v = g.points[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double u = g.points[i];
      tri_points_.emplace_back(u * (1.0 - v), v);
      tri_weights_.push_back(g.weights[i] * g.weights[j] * (1.0 - v));
    }
  }
}

}  // namespace hjbi
