#pragma once

#include "hjbi/common.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hjbi {

/// Uniform samples of the compact control sets, endpoints included.
struct ControlGrid {
  std::vector<double> alpha;
  std::vector<double> beta;

  static std::vector<double> interval(double lo, double hi, int samples);
  static std::vector<double> singleton(double value) { return {value}; }

  std::size_t size() const { return alpha.size() * beta.size(); }
};

/// Coefficients (A, b, c, f) of one linear operator of the family.
struct Coefficients {
  Mat2 A = Mat2::Identity();
  Vec2 b = Vec2::Zero();
  double c = 1.0;
  double f = 0.0;
};

/// gamma * (A, b, c, f), stored flat: the quantities the nonlinear operator needs.
struct Renormalized {
  double a11 = 0.0, a12 = 0.0, a22 = 0.0;
  double b1 = 0.0, b2 = 0.0;
  double c = 0.0;
  double f = 0.0;

  /// gamma (-A:H - b.g + c u - f)
  double apply(double u, const Vec2& g, const Mat2& h) const {
    return -(a11 * h(0, 0) + 2.0 * a12 * h(0, 1) + a22 * h(1, 1)) - (b1 * g.x() + b2 * g.y()) + c * u - f;
  }
};

using CoefficientFn = std::function<Coefficients(const Vec2& y, double alpha, double beta)>;
/// Fill `out[ia * n_beta + ib]` with the renormalized coefficients at y for all
/// control pairs. Optional fast path; must agree with the pointwise callback.
using BatchFn = std::function<void(const Vec2& y, std::span<Renormalized> out)>;

/// gamma = (tr A + c/lambda) / (|A|^2 + |b|^2/(2 lambda) + c^2/lambda^2)
double renormalization(const Coefficients& k, double lambda);
Renormalized renormalize(const Coefficients& k, double lambda);

/// Periodic HJBI problem  inf_a sup_b { -A:D^2u - b.Du + c u - f } = 0.
struct HJBIProblem {
  std::string name;
  CoefficientFn coefficients;
  ControlGrid controls;
  double lambda = 1.0;
  double delta = 0.5;
  BatchFn batch;

  double gamma(const Vec2& y, double alpha, double beta) const {
    return renormalization(coefficients(y, alpha, beta), lambda);
  }
  /// Renormalized coefficients for every control pair at y.
  void sample(const Vec2& y, std::span<Renormalized> out) const;
};

struct CordesReport {
  bool holds = false;
  double worst_margin = 0.0;          ///< min of rhs - lhs with the problem's delta
  double max_admissible_delta = 0.0;  ///< largest delta in (0,1] for which the inequality holds
  double zeta1 = 0.0;                 ///< smallest eigenvalue of A seen
  double zeta2 = 0.0;                 ///< largest eigenvalue of A seen
  double min_c = 0.0;
  double min_gamma = 0.0;
};

/// Check |A|^2 + |b|^2/(2l) + c^2/l^2 <= (tr A + c/l)^2 / (2 + delta) on the
/// grid {(i/n_y, j/n_y)} times the control grid.
CordesReport cordes_check(const HJBIProblem& problem, int n_y_samples);

/// Validate c > 0, A positive definite and the Cordes inequality on samples.
/// Throws ErrorKind::cordes_violation describing the first failure.
void validate_problem(const HJBIProblem& problem, int n_y_samples);

struct PointEval {
  double value = 0.0;
  int alpha_index = 0;
  int beta_index = 0;
  Renormalized frozen;  ///< coefficients at the optimizing pair
};

/// Evaluates F_gamma[u] at a point by exhaustive inf-sup over the control
/// grid. Holds scratch storage, so use one per thread.
class ControlSweep {
 public:
  explicit ControlSweep(const HJBIProblem& problem);

  /// Ties are broken towards the lowest sample index.
  PointEval operator()(const Vec2& y, double u, const Vec2& grad, const Mat2& hess);

  /// Same, with coefficients already sampled at y (see HJBIProblem::sample).
  PointEval optimize(std::span<const Renormalized> table, double u, const Vec2& grad, const Mat2& hess) const;

  const HJBIProblem& problem() const { return problem_; }

 private:
  const HJBIProblem& problem_;
  std::vector<Renormalized> table_;
};

PointEval eval_F_gamma(const HJBIProblem& problem, const Vec2& y, double u, const Vec2& grad, const Mat2& hess);

/// Closed-form exact solution used by the manufactured problem.
struct ExactSolution {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> gradient;
  std::function<Mat2(const Vec2&)> hessian;
};

/// cos(2 pi y1) cos(2 pi y2)
ExactSolution cosine_product_solution();

/// The manufactured periodic HJBI problem: A = Q(b) diag((cos a + sin a)/sqrt2,
/// (cos a - sin a)/sqrt2) Q(b)^T, b = 0, c = sec(a)/sqrt2, f = c * ftilde with
/// ftilde chosen on the control grid so that cos(2 pi y1) cos(2 pi y2) solves it.
HJBIProblem make_exp1_problem(int n_alpha = 33, int n_beta = 33);

}  // namespace hjbi
