#include "hjbi/hjbi_problem.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

namespace hjbi {

std::vector<double> ControlGrid::interval(double lo, double hi, int samples) {
  require(samples >= 1, "control grid needs at least one sample");
  require(lo <= hi, "control interval must satisfy lo <= hi");
  if (samples == 1 || lo == hi) return {lo};
  std::vector<double> out(samples);
  for (int i = 0; i < samples; ++i) out[i] = lo + (hi - lo) * i / (samples - 1);
  out.back() = hi;
  return out;
}

double renormalization(const Coefficients& k, double lambda) {
  const double cl = k.c / lambda;
  return (k.A.trace() + cl) / (k.A.squaredNorm() + k.b.squaredNorm() / (2.0 * lambda) + cl * cl);
}

Renormalized renormalize(const Coefficients& k, double lambda) {
  const double g = renormalization(k, lambda);
  Renormalized r;
  r.a11 = g * k.A(0, 0);
  r.a12 = g * 0.5 * (k.A(0, 1) + k.A(1, 0));
  r.a22 = g * k.A(1, 1);
  r.b1 = g * k.b.x();
  r.b2 = g * k.b.y();
  r.c = g * k.c;
  r.f = g * k.f;
  return r;
}

void HJBIProblem::sample(const Vec2& y, std::span<Renormalized> out) const {
  if (batch) {
    batch(y, out);
    return;
  }
  const std::size_t nb = controls.beta.size();
  for (std::size_t ia = 0; ia < controls.alpha.size(); ++ia)
    for (std::size_t ib = 0; ib < nb; ++ib)
      out[ia * nb + ib] = renormalize(coefficients(y, controls.alpha[ia], controls.beta[ib]), lambda);
}

CordesReport cordes_check(const HJBIProblem& problem, int n_y_samples) {
  require(n_y_samples >= 1, "cordes_check needs at least one sample per direction");
  CordesReport report;
  report.max_admissible_delta = std::numeric_limits<double>::infinity();
  report.worst_margin = std::numeric_limits<double>::infinity();
  report.zeta1 = std::numeric_limits<double>::infinity();
  report.zeta2 = 0.0;
  report.min_c = std::numeric_limits<double>::infinity();
  report.min_gamma = std::numeric_limits<double>::infinity();
  const double lambda = problem.lambda;
  for (int j = 0; j < n_y_samples; ++j) {
    for (int i = 0; i < n_y_samples; ++i) {
      const Vec2 y(double(i) / n_y_samples, double(j) / n_y_samples);
      for (double a : problem.controls.alpha) {
        for (double b : problem.controls.beta) {
          const Coefficients k = problem.coefficients(y, a, b);
          const double lhs = k.A.squaredNorm() + k.b.squaredNorm() / (2.0 * lambda) + k.c * k.c / (lambda * lambda);
          const double s = k.A.trace() + k.c / lambda;
          report.max_admissible_delta = std::min(report.max_admissible_delta, s * s / lhs - 2.0);
          report.worst_margin = std::min(report.worst_margin, s * s / (2.0 + problem.delta) - lhs);
          const Eigen::SelfAdjointEigenSolver<Mat2> eig(0.5 * (k.A + k.A.transpose()), Eigen::EigenvaluesOnly);
          report.zeta1 = std::min(report.zeta1, eig.eigenvalues()(0));
          report.zeta2 = std::max(report.zeta2, eig.eigenvalues()(1));
          report.min_c = std::min(report.min_c, k.c);
          report.min_gamma = std::min(report.min_gamma, renormalization(k, lambda));
        }
      }
    }
  }
  report.max_admissible_delta = std::min(report.max_admissible_delta, 1.0);
  report.holds = report.max_admissible_delta > 0.0 && report.worst_margin >= 0.0 && report.zeta1 > 0.0 &&
                 report.min_c > 0.0;
  return report;
}

void validate_problem(const HJBIProblem& problem, int n_y_samples) {
  require(problem.lambda > 0.0, "lambda must be positive");
  require(problem.delta > 0.0 && problem.delta <= 1.0, "delta must lie in (0,1)");
  require(!problem.controls.alpha.empty() && !problem.controls.beta.empty(), "control sets must be nonempty");
  const CordesReport r = cordes_check(problem, n_y_samples);
  std::ostringstream msg;
  if (!(r.min_c > 0.0)) {
    msg << "problem '" << problem.name << "': c must be positive (min sampled c = " << r.min_c << ")";
  } else if (!(r.zeta1 > 0.0)) {
    msg << "problem '" << problem.name << "': A is not positive definite (min eigenvalue " << r.zeta1 << ")";
  } else if (!r.holds) {
    msg << "problem '" << problem.name << "': Cordes condition fails (lambda = " << problem.lambda
        << ", delta = " << problem.delta << ", max admissible delta = " << r.max_admissible_delta << ")";
  } else {
    return;
  }
  fail(ErrorKind::cordes_violation, msg.str());
}

ControlSweep::ControlSweep(const HJBIProblem& problem) : problem_(problem), table_(problem.controls.size()) {}

PointEval ControlSweep::operator()(const Vec2& y, double u, const Vec2& grad, const Mat2& hess) {
  problem_.sample(y, table_);
  return optimize(table_, u, grad, hess);
}

PointEval ControlSweep::optimize(std::span<const Renormalized> table, double u, const Vec2& grad,
                                 const Mat2& hess) const {
  const std::size_t na = problem_.controls.alpha.size();
  const std::size_t nb = problem_.controls.beta.size();
  const double h11 = hess(0, 0), h12 = 0.5 * (hess(0, 1) + hess(1, 0)), h22 = hess(1, 1);
  const double g1 = grad.x(), g2 = grad.y();
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_a = 0, best_b = 0;
  for (std::size_t ia = 0; ia < na; ++ia) {
    const Renormalized* row = table.data() + ia * nb;
    double row_max = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    bool pruned = false;
    for (std::size_t ib = 0; ib < nb; ++ib) {
      const Renormalized& r = row[ib];
      const double v = -(r.a11 * h11 + 2.0 * r.a12 * h12 + r.a22 * h22) - (r.b1 * g1 + r.b2 * g2) + r.c * u - r.f;
      if (v > row_max) {
        row_max = v;
        arg = ib;
      }
      // sup over this row can no longer beat the current inf
      if (row_max >= best) {
        pruned = true;
        break;
      }
    }
    if (!pruned && row_max < best) {
      best = row_max;
      best_a = ia;
      best_b = arg;
    }
  }
  PointEval out;
  out.value = best;
  out.alpha_index = static_cast<int>(best_a);
  out.beta_index = static_cast<int>(best_b);
  out.frozen = table[best_a * nb + best_b];
  return out;
}

PointEval eval_F_gamma(const HJBIProblem& problem, const Vec2& y, double u, const Vec2& grad, const Mat2& hess) {
  ControlSweep sweep(problem);
  return sweep(y, u, grad, hess);
}

ExactSolution cosine_product_solution() {
  constexpr double tau = 2.0 * std::numbers::pi;
  ExactSolution s;
  s.value = [](const Vec2& y) { return std::cos(tau * y.x()) * std::cos(tau * y.y()); };
  s.gradient = [](const Vec2& y) {
    return Vec2(-tau * std::sin(tau * y.x()) * std::cos(tau * y.y()),
                -tau * std::cos(tau * y.x()) * std::sin(tau * y.y()));
  };
  s.hessian = [](const Vec2& y) {
    const double cx = std::cos(tau * y.x()), sx = std::sin(tau * y.x());
    const double cy = std::cos(tau * y.y()), sy = std::sin(tau * y.y());
    Mat2 h;
    h << -tau * tau * cx * cy, tau * tau * sx * sy, tau * tau * sx * sy, -tau * tau * cx * cy;
    return h;
  };
  return s;
}

namespace {

Mat2 exp1_diffusion(double alpha, double beta) {
  Mat2 q;
  q << std::cos(beta), -std::sin(beta), std::sin(beta), std::cos(beta);
  const double s2 = std::numbers::sqrt2;
  const Eigen::Vector2d d((std::cos(alpha) + std::sin(alpha)) / s2, (std::cos(alpha) - std::sin(alpha)) / s2);
  return q * d.asDiagonal() * q.transpose();
}

/// Control-only part of the manufactured problem, shared by the callbacks.
struct Exp1Tables {
  ControlGrid controls;
  double lambda = 1.0;
  std::vector<Renormalized> base;  // renormalized with f = 0
  ExactSolution exact = cosine_product_solution();

  /// Renormalized right-hand side: inf_a sup_b { -gamma A : D^2u } + u.
  double ftilde(const Vec2& y) const {
    const Mat2 h = exact.hessian(y);
    const double u = exact.value(y);
    const std::size_t nb = controls.beta.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t ia = 0; ia < controls.alpha.size(); ++ia) {
      double row = -std::numeric_limits<double>::infinity();
      for (std::size_t ib = 0; ib < nb; ++ib) {
        const Renormalized& r = base[ia * nb + ib];
        row = std::max(row, -(r.a11 * h(0, 0) + 2.0 * r.a12 * h(0, 1) + r.a22 * h(1, 1)));
      }
      best = std::min(best, row);
    }
    return best + u;
  }
};

}  // namespace

HJBIProblem make_exp1_problem(int n_alpha, int n_beta) {
  auto tables = std::make_shared<Exp1Tables>();
  tables->controls.alpha = ControlGrid::interval(0.0, 0.5, n_alpha);
  tables->controls.beta = ControlGrid::interval(0.0, 2.0 * std::numbers::pi, n_beta);
  for (double a : tables->controls.alpha) {
    for (double b : tables->controls.beta) {
      Coefficients k;
      k.A = exp1_diffusion(a, b);
      k.c = 1.0 / (std::cos(a) * std::numbers::sqrt2);
      tables->base.push_back(renormalize(k, tables->lambda));
    }
  }

  HJBIProblem p;
  p.name = "exp1";
  p.controls = tables->controls;
  p.lambda = tables->lambda;
  p.coefficients = [tables](const Vec2& y, double a, double b) {
    Coefficients k;
    k.A = exp1_diffusion(a, b);
    k.c = 1.0 / (std::cos(a) * std::numbers::sqrt2);
    k.f = k.c * tables->ftilde(y);
    return k;
  };
  p.batch = [tables](const Vec2& y, std::span<Renormalized> out) {
    const double ft = tables->ftilde(y);
    for (std::size_t i = 0; i < tables->base.size(); ++i) {
      out[i] = tables->base[i];
      out[i].f = tables->base[i].c * ft;
    }
  };
  p.delta = std::min(cordes_check(p, 1).max_admissible_delta, 1.0);
  return p;
}

}  // namespace hjbi
