#pragma once

#include "hjbi/solver.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace hjbi {

/// Data of F(x, y, p, R) = inf_a sup_b { -A(y,a,b):R - b(x,y,a,b).p - f(x,y,a,b) }.
struct EffOperatorData {
  std::string name = "custom";
  std::function<Mat2(const Vec2& y, double alpha, double beta)> A;
  std::function<Vec2(const Vec2& x, const Vec2& y, double alpha, double beta)> b;
  std::function<double(const Vec2& x, const Vec2& y, double alpha, double beta)> f;
  ControlGrid controls;
  double lambda = 1.0;  ///< Cordes parameter of the cell operator
};

struct EffHamQuery {
  Vec2 x = Vec2::Zero();
  Vec2 p = Vec2::Zero();
  Mat2 R = Mat2::Zero();
  double sigma = 0.0;
  double H_T_sigma = 0.0;
  double corrector_mean = 0.0;
  double estimator = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Cell sigma-problem: A unchanged, b = 0, c = sigma, f = A:R + b.p + f, lambda_sigma = sigma * lambda.
HJBIProblem make_cell_problem(const EffOperatorData& data, const Vec2& x, const Vec2& p, const Mat2& R, double sigma);

struct CorrectorSolve {
  EffHamQuery query;
  DiscreteFunction corrector;
};

/// Solves the cell problem and returns H_T^sigma = -sigma * int v_T^sigma.
/// params.lambda is replaced by lambda_sigma.
CorrectorSolve solve_corrector(const Assembler& assembler, const EffOperatorData& data, const Vec2& x,
                               const Vec2& p, const Mat2& R, double sigma, SchemeParams params,
                               const HowardOptions& options,
                               const std::optional<DiscreteFunction>& initial = std::nullopt);

EffHamQuery effective_hamiltonian(const Assembler& assembler, const EffOperatorData& data, const Vec2& x,
                                  const Vec2& p, const Mat2& R, double sigma, const SchemeParams& params,
                                  const HowardOptions& options);

/// The operator of the homogenization example: A = (1 + a b a1(y)) B with
/// B = [[2,-1],[-1,4]], a1 = sin^2(2 pi y1) cos^2(2 pi y2) + 1, f = 1, b = 0,
/// controls [1,2] x [0,1], lambda = 1/4. With `constant_coefficients` a1 is dropped.
EffOperatorData make_exp2_data(int n_alpha = 17, int n_beta = 17, bool constant_coefficients = false);
Mat2 exp2_matrix_R();
Mat2 exp2_matrix_B();

/// Closed-form effective Hamiltonian of the example operator,
/// max{ -(int 1/a0)^-1 B:R - 1, -(int 1/(a0+a1))^-1 B:R - 1 }.
double exact_H_exp2(const Mat2& R);
/// 9 sqrt(6) pi / K(1/3) - 1, K with parameter m = k^2.
double exp2_reference_value();

struct SigmaRow {
  double sigma = 0.0;
  double H_T_sigma = 0.0;
  double E_T_sigma = 0.0;
  double estimator = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// One corrector solve per sigma on the shared space; each solve starts from the
/// previous corrector rescaled by sigma_prev / sigma.
std::vector<SigmaRow> sigma_sweep(const Assembler& assembler, const EffOperatorData& data, const Vec2& x,
                                  const Vec2& p, const Mat2& R, const std::vector<double>& sigmas,
                                  const SchemeParams& params, const HowardOptions& options, double reference_H);

/// Header `sigma,H_T_sigma,E_T_sigma,estimator,iterations`.
void write_sigma_csv(const std::vector<SigmaRow>& rows, std::ostream& os);

/// Least-squares slope of log(E) against log(sigma).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hjbi
