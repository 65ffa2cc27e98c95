#pragma once

#include "hjbi/assembly.hpp"

#include <optional>
#include <vector>

namespace hjbi {

enum class LinearMethod {
  automatic,  ///< dense LU up to kDenseLimit unknowns, sparse LU above
  dense,
  sparse_lu,
  gmres,  ///< restarted GMRES with incomplete LU (ILUT) preconditioning
};

struct LinearSolveOptions {
  LinearMethod method = LinearMethod::automatic;
  int gmres_restart = 200;
  int gmres_max_iter = 5000;
  double ilut_drop = 1e-6;
  int ilut_fill = 40;
};

inline constexpr int kDenseLimit = 2000;

/// x with |Mx - rhs| <= max(1e-12, 1e-10 |rhs|, eps | |M| |x| |), the residual
/// measured in extended precision. Throws ErrorKind::linear_solve with the
/// achieved residual when that cannot be reached.
Eigen::VectorXd sparse_solve(const AssembledSystem& system, const LinearSolveOptions& options = {});

struct SolveReport {
  DiscreteFunction solution;
  int iterations = 0;
  std::vector<double> residual_history;  ///< Euclidean norm of the residual vector after each step
  bool converged = false;
  bool policy_stable = false;  ///< stopped because the control selection repeated
};

struct HowardOptions {
  double tol = 1e-10;
  int max_iter = 50;
  LinearSolveOptions linear;
};

/// Policy iteration for a_T(u, .) = 0. The residual tolerance is relative:
/// |r| <= tol * max(1, |rhs|) with rhs the right-hand side of the last frozen system.
SolveReport howard_solve(const Assembler& assembler, const HJBIProblem& problem, const SchemeParams& params,
                         const HowardOptions& options, const std::optional<DiscreteFunction>& initial = std::nullopt);

SolveReport howard_solve(std::shared_ptr<const FESpace> space, const HJBIProblem& problem,
                         const SchemeParams& params, double tol, int max_iter,
                         const std::optional<DiscreteFunction>& initial = std::nullopt);

}  // namespace hjbi
