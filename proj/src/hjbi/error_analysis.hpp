#pragma once

#include "hjbi/assembly.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace hjbi {

/// Squared pieces of |v|_{T,lambda}: the norm squared is
/// hessian + 2 lambda gradient + lambda^2 value + jump.
struct NormParts {
  double hessian = 0.0;   ///< int |D^2 v|^2 (broken)
  double gradient = 0.0;  ///< int |grad v|^2
  double value = 0.0;     ///< int v^2
  double jump = 0.0;      ///< |v|_J^2

  double squared(double lambda) const { return hessian + 2.0 * lambda * gradient + lambda * lambda * value + jump; }
  double norm(double lambda) const;
};

/// Parts of u_T - u for a smooth periodic reference (whose jumps vanish).
NormParts norm_parts(const Assembler& assembler, const DiscreteFunction& u_T, const ExactSolution& reference);
/// Parts of u_T - reference for a reference on the same space.
NormParts norm_parts(const Assembler& assembler, const DiscreteFunction& u_T, const DiscreteFunction& reference);

double norm_T_lambda(const Assembler& assembler, double lambda, const DiscreteFunction& u_T,
                     const ExactSolution& reference);
double norm_T_lambda(const Assembler& assembler, double lambda, const DiscreteFunction& u_T,
                     const DiscreteFunction& reference);

/// sqrt( int_F h^-1 |[grad v]|^2 + h^-3 [v]^2 ) over all faces, periodic pairs included.
double jump_seminorm(const Assembler& assembler, const DiscreteFunction& v);

/// sqrt( int F_gamma[u]^2 + |u|_J^2 ).
double estimator_eta(const Assembler& assembler, const HJBIProblem& problem, const DiscreteFunction& u);
/// Same, reusing a policy evaluation of u.
double estimator_eta(const Assembler& assembler, const std::vector<PointEval>& evals, const DiscreteFunction& u);

/// Integral of v over the unit cell.
double integrate(const Assembler& assembler, const DiscreteFunction& v);

struct ConvergenceRow {
  long N = 0;
  double h_max = 0.0;
  double error = 0.0;
  double estimator = 0.0;
  std::optional<double> eoc_error;
  std::optional<double> eoc_estimator;
  std::optional<double> eoc_error_h;
  std::optional<double> eoc_estimator_h;
};

/// eoc = -log(e_{k+1}/e_k) / log(N_{k+1}/N_k), and the same against h (log(h_{k+1}/h_k) in the denominator, no sign flip).
std::vector<ConvergenceRow> observed_orders(std::vector<ConvergenceRow> rows);

/// Header `N,h_max,error,estimator,eoc_error,eoc_estimator`; absent orders are empty fields.
void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os);

}  // namespace hjbi
