#include "hjbi/homogenization.hpp"

#include "hjbi/error_analysis.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace hjbi {

HJBIProblem make_cell_problem(const EffOperatorData& data, const Vec2& x, const Vec2& p, const Mat2& R,
                              double sigma) {
  require(sigma > 0.0, "sigma must be positive");
  require(data.lambda > 0.0, "operator lambda must be positive");
  require(static_cast<bool>(data.A), "operator data needs a diffusion callback");
  HJBIProblem cell;
  cell.name = data.name + "-cell";
  cell.controls = data.controls;
  cell.lambda = sigma * data.lambda;
  cell.coefficients = [data, x, p, R, sigma](const Vec2& y, double a, double b) {
    Coefficients k;
    k.A = data.A(y, a, b);
    k.b = Vec2::Zero();
    k.c = sigma;
    k.f = frobenius(k.A, R) + (data.b ? data.b(x, y, a, b).dot(p) : 0.0) + (data.f ? data.f(x, y, a, b) : 0.0);
    return k;
  };
  cell.delta = std::min(1.0, cordes_check(cell, 4).max_admissible_delta);
  return cell;
}

CorrectorSolve solve_corrector(const Assembler& assembler, const EffOperatorData& data, const Vec2& x,
                               const Vec2& p, const Mat2& R, double sigma, SchemeParams params,
                               const HowardOptions& options, const std::optional<DiscreteFunction>& initial) {
  const HJBIProblem cell = make_cell_problem(data, x, p, R, sigma);
  params.lambda = cell.lambda;
  SolveReport report = howard_solve(assembler, cell, params, options, initial);
  EffHamQuery q;
  q.x = x;
  q.p = p;
  q.R = R;
  q.sigma = sigma;
  q.corrector_mean = integrate(assembler, report.solution);
  q.H_T_sigma = -sigma * q.corrector_mean;
  q.estimator = estimator_eta(assembler, cell, report.solution);
  q.iterations = report.iterations;
  q.converged = report.converged;
  return {q, std::move(report.solution)};
}

EffHamQuery effective_hamiltonian(const Assembler& assembler, const EffOperatorData& data, const Vec2& x,
                                  const Vec2& p, const Mat2& R, double sigma, const SchemeParams& params,
                                  const HowardOptions& options) {
  return solve_corrector(assembler, data, x, p, R, sigma, params, options).query;
}

Mat2 exp2_matrix_B() {
  Mat2 b;
  b << 2.0, -1.0, -1.0, 4.0;
  return b;
}

Mat2 exp2_matrix_R() {
  Mat2 r;
  r << -2.0, 1.0, 1.0, -3.0;
  return r;
}

namespace {

double exp2_a1(const Vec2& y) {
  const double s = std::sin(2.0 * std::numbers::pi * y.x());
  const double c = std::cos(2.0 * std::numbers::pi * y.y());
  return s * s * c * c + 1.0;
}

}  // namespace

EffOperatorData make_exp2_data(int n_alpha, int n_beta, bool constant_coefficients) {
  EffOperatorData d;
  d.name = constant_coefficients ? "exp2-constant" : "exp2";
  d.controls.alpha = ControlGrid::interval(1.0, 2.0, n_alpha);
  d.controls.beta = ControlGrid::interval(0.0, 1.0, n_beta);
  d.lambda = 0.25;
  const Mat2 B = exp2_matrix_B();
  if (constant_coefficients) {
    d.A = [B](const Vec2&, double, double) -> Mat2 { return B; };
  } else {
    d.A = [B](const Vec2& y, double a, double b) -> Mat2 { return (1.0 + a * b * exp2_a1(y)) * B; };
  }
  d.b = [](const Vec2&, const Vec2&, double, double) { return Vec2::Zero().eval(); };
  d.f = [](const Vec2&, const Vec2&, double, double) { return 1.0; };
  return d;
}

double exact_H_exp2(const Mat2& R) {
  // The integrand is smooth and periodic, so the trapezoidal rule converges spectrally.
  constexpr int n = 256;
  double inv_sum = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) inv_sum += 1.0 / (1.0 + exp2_a1(Vec2(double(i) / n, double(j) / n)));
  const double int_inv_a0_a1 = inv_sum / (double(n) * n);
  const double BR = frobenius(exp2_matrix_B(), R);
  return std::max(-BR - 1.0, -BR / int_inv_a0_a1 - 1.0);
}

double exp2_reference_value() {
  return 9.0 * std::sqrt(6.0) * std::numbers::pi / std::comp_ellint_1(1.0 / std::sqrt(3.0)) - 1.0;
}

std::vector<SigmaRow> sigma_sweep(const Assembler& assembler, const EffOperatorData& data, const Vec2& x,
                                  const Vec2& p, const Mat2& R, const std::vector<double>& sigmas,
                                  const SchemeParams& params, const HowardOptions& options, double reference_H) {
  require(!sigmas.empty(), "sigma_sweep needs at least one sigma");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    require(sigmas[i] > 0.0, "sigmas must be positive");
    require(i == 0 || sigmas[i] < sigmas[i - 1], "sigmas must be strictly decreasing");
  }
  std::vector<SigmaRow> rows;
  std::optional<DiscreteFunction> guess;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (guess) guess->coeffs() *= sigmas[i - 1] / sigmas[i];
    CorrectorSolve s = solve_corrector(assembler, data, x, p, R, sigmas[i], params, options, guess);
    SigmaRow row;
    row.sigma = sigmas[i];
    row.H_T_sigma = s.query.H_T_sigma;
    row.E_T_sigma = std::abs(s.query.H_T_sigma - reference_H) / std::abs(reference_H);
    row.estimator = s.query.estimator;
    row.iterations = s.query.iterations;
    row.converged = s.query.converged;
    rows.push_back(row);
    guess = std::move(s.corrector);
  }
  return rows;
}

void write_sigma_csv(const std::vector<SigmaRow>& rows, std::ostream& os) {
  os.precision(10);
  os << "sigma,H_T_sigma,E_T_sigma,estimator,iterations\n";
  for (const SigmaRow& r : rows)
    os << r.sigma << ',' << r.H_T_sigma << ',' << r.E_T_sigma << ',' << r.estimator << ',' << r.iterations << '\n';
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "loglog_slope needs two or more matching samples");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "loglog_slope needs positive samples");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hjbi
