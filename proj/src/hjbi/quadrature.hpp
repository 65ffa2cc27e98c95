#pragma once

#include "hjbi/common.hpp"

#include <vector>

namespace hjbi {

/// Largest polynomial exactness the rule tables support.
inline constexpr int kMaxQuadratureExactness = 60;

/// Gauss-Legendre nodes and weights on [0, 1]; exact for degree 2n-1.
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};
GaussRule gauss_legendre_unit(int n);

/// Quadrature on the reference triangle {(0,0),(1,0),(0,1)} and the reference
/// edge [0,1]. Triangle weights sum to 1/2, edge weights to 1. The triangle
/// rule is the collapsed (conical) product of two Gauss-Legendre rules, which
/// keeps every point strictly inside and every weight positive.
class QuadratureRule {
 public:
  QuadratureRule(int volume_exactness, int edge_exactness);

  /// Default exactness 2p+4 on both the volume and the edge.
  static QuadratureRule for_degree(int degree) { return {2 * degree + 4, 2 * degree + 4}; }

  const std::vector<Vec2>& triangle_points() const { return tri_points_; }
  const std::vector<double>& triangle_weights() const { return tri_weights_; }
  const std::vector<double>& edge_points() const { return edge_.points; }
  const std::vector<double>& edge_weights() const { return edge_.weights; }
  int volume_exactness() const { return volume_exactness_; }
  int edge_exactness() const { return edge_exactness_; }

 private:
  int volume_exactness_;
  int edge_exactness_;
  std::vector<Vec2> tri_points_;
  std::vector<double> tri_weights_;
  GaussRule edge_;
};

}  // namespace hjbi
