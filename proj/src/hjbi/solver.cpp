#include "hjbi/solver.hpp"

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <limits>
#include <sstream>

namespace hjbi {

namespace {

double accepted_residual(const Eigen::VectorXd& rhs) { return std::max(1e-12, 1e-10 * rhs.norm()); }

/// eps * | |M| |x| |: the residual of the correctly rounded solution can be this large.
double rounding_floor(const SparseMatrix& m, const Eigen::VectorXd& x) {
  Eigen::VectorXd ax(x.size());
  for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
    double acc = 0.0;
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) acc += std::abs(it.value() * x[it.col()]);
    ax[i] = acc;
  }
  return std::numeric_limits<double>::epsilon() * ax.norm();
}

/// rhs - M x accumulated in extended precision; the double residual is
/// dominated by rounding when |M| |x| >> |rhs|.
Eigen::VectorXd residual_extended(const SparseMatrix& m, const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) {
  Eigen::VectorXd r(rhs.size());
  for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
    long double acc = rhs[i];
    for (SparseMatrix::InnerIterator it(m, i); it; ++it)
      acc -= static_cast<long double>(it.value()) * static_cast<long double>(x[it.col()]);
    r[i] = static_cast<double>(acc);
  }
  return r;
}

/// Iterative refinement with extended-precision residuals. Continues until the
/// correction reaches rounding level or stops contracting, which recovers full
/// accuracy for the ill-conditioned constant mode of small-sigma cell problems.
template <class Solve>
void refine(const AssembledSystem& sys, Eigen::VectorXd& x, Solve&& solve, int max_steps = 10) {
  double last = INFINITY;
  for (int k = 0; k < max_steps; ++k) {
    const Eigen::VectorXd dx = solve(residual_extended(sys.matrix, x, sys.rhs));
    const double dn = dx.lpNorm<Eigen::Infinity>();
    if (!(dn < 0.5 * last)) break;
    x += dx;
    last = dn;
    if (dn <= 4.0 * std::numeric_limits<double>::epsilon() * x.lpNorm<Eigen::Infinity>()) break;
  }
}

Eigen::VectorXd solve_dense(const AssembledSystem& sys) {
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd(sys.matrix));
  Eigen::VectorXd x = lu.solve(sys.rhs);
  refine(sys, x, [&](const Eigen::VectorXd& r) { return Eigen::VectorXd(lu.solve(r)); });
  return x;
}

Eigen::VectorXd solve_sparse_lu(const AssembledSystem& sys) {
  const Eigen::SparseMatrix<double> m(sys.matrix);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) fail(ErrorKind::linear_solve, "sparse LU factorization failed: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(sys.rhs);
  refine(sys, x, [&](const Eigen::VectorXd& r) { return Eigen::VectorXd(lu.solve(r)); });
  return x;
}

Eigen::VectorXd solve_gmres(const AssembledSystem& sys, const LinearSolveOptions& o) {
  const Eigen::SparseMatrix<double> m(sys.matrix);
  Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> gmres;
  gmres.preconditioner().setDroptol(o.ilut_drop);
  gmres.preconditioner().setFillfactor(o.ilut_fill);
  gmres.set_restart(o.gmres_restart);
  gmres.setMaxIterations(o.gmres_max_iter);
  const double bnorm = sys.rhs.norm();
  gmres.setTolerance(bnorm > 0.0 ? 0.1 * accepted_residual(sys.rhs) / bnorm : 1e-14);
  gmres.compute(m);
  if (gmres.info() != Eigen::Success) fail(ErrorKind::linear_solve, "ILUT preconditioner setup failed");
  Eigen::VectorXd x = gmres.solve(sys.rhs);
  refine(sys, x, [&](const Eigen::VectorXd& r) { return Eigen::VectorXd(gmres.solve(r)); }, 3);
  return x;
}

/// The system in trial and test bases {1, phi_1, ..., phi_{N-1}}: row and
/// column 0 refer to the constant function, and x = z + z_0 (1 - e_0).
AssembledSystem constant_basis_system(const AssembledSystem& sys) {
  const SparseMatrix& m = sys.matrix;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(m.nonZeros() + 2 * m.rows());
  triplets.emplace_back(0, 0, sys.constant_pair);
  for (Eigen::Index j = 1; j < m.cols(); ++j)
    if (sys.constant_test[j] != 0.0) triplets.emplace_back(0, j, sys.constant_test[j]);
  for (Eigen::Index i = 1; i < m.outerSize(); ++i) {
    if (sys.constant_action[i] != 0.0) triplets.emplace_back(i, 0, sys.constant_action[i]);
    for (SparseMatrix::InnerIterator it(m, i); it; ++it)
      if (it.col() != 0) triplets.emplace_back(i, it.col(), it.value());
  }
  AssembledSystem out;
  out.matrix.resize(m.rows(), m.cols());
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.matrix.makeCompressed();
  out.rhs = sys.rhs;
  out.rhs[0] = sys.constant_rhs;
  return out;
}

}  // namespace

Eigen::VectorXd sparse_solve(const AssembledSystem& system, const LinearSolveOptions& options) {
  require(system.matrix.rows() == system.matrix.cols(), "sparse_solve: matrix must be square");
  require(system.rhs.size() == system.matrix.rows(), "sparse_solve: rhs length mismatch");
  const Eigen::Index n = system.matrix.rows();
  if (n == 0) return {};

  LinearMethod method = options.method;
  if (method == LinearMethod::automatic) method = n <= kDenseLimit ? LinearMethod::dense : LinearMethod::sparse_lu;

  // Solving in bases that contain the constant function keeps the nearly
  // singular constant mode (small zeroth-order terms) free of assembly rounding.
  const bool shift = system.constant_action.size() == n && system.constant_test.size() == n;
  AssembledSystem shifted;
  if (shift) shifted = constant_basis_system(system);
  const AssembledSystem& work = shift ? shifted : system;

  Eigen::VectorXd x;
  switch (method) {
    case LinearMethod::dense: x = solve_dense(work); break;
    case LinearMethod::gmres: x = solve_gmres(work, options); break;
    default: x = solve_sparse_lu(work); break;
  }
  const double achieved = x.allFinite() ? residual_extended(work.matrix, x, work.rhs).norm() : INFINITY;
  const double required = std::max(accepted_residual(work.rhs), x.allFinite() ? rounding_floor(work.matrix, x) : 0.0);
  if (!(achieved <= required)) {
    std::ostringstream msg;
    msg << "linear solve did not reach the required residual (achieved " << achieved << ", required " << required
        << ", N = " << n << ")";
    fail(ErrorKind::linear_solve, msg.str());
  }
  if (shift) x.tail(n - 1).array() += x[0];
  return x;
}

namespace {

bool same_policy(const std::vector<PointEval>& a, const std::vector<PointEval>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].alpha_index != b[i].alpha_index || a[i].beta_index != b[i].beta_index) return false;
  return true;
}

}  // namespace

SolveReport howard_solve(const Assembler& assembler, const HJBIProblem& problem, const SchemeParams& params,
                         const HowardOptions& options, const std::optional<DiscreteFunction>& initial) {
  require(options.tol > 0.0, "howard_solve: tol must be positive");
  require(options.max_iter >= 1, "howard_solve: max_iter must be >= 1");
  params.validate();
  const auto space = assembler.space_ptr();
  DiscreteFunction u = initial ? *initial : DiscreteFunction(space);
  require(u.coeffs().size() == space->n_dofs(), "howard_solve: initial guess lives on a different space");

  SolveReport report{u, 0, {}, false, false};
  double best = INFINITY;
  std::vector<PointEval> evals = assembler.policy(problem, u);
  for (int k = 1; k <= options.max_iter; ++k) {
    const AssembledSystem sys = assembler.linearized(params, evals);
    DiscreteFunction next(space, sparse_solve(sys, options.linear));
    std::vector<PointEval> next_evals = assembler.policy(problem, next);
    const double r = assembler.residual(next_evals, params, next).norm();
    const bool stable = same_policy(evals, next_evals);
    report.iterations = k;
    report.residual_history.push_back(r);
    u = std::move(next);
    evals = std::move(next_evals);
    if (r < best) {
      best = r;
      report.solution = u;
    }
    if (stable || r <= options.tol * std::max(1.0, sys.rhs.norm())) {
      report.converged = true;
      report.policy_stable = stable;
      report.solution = u;
      break;
    }
  }
  return report;
}

SolveReport howard_solve(std::shared_ptr<const FESpace> space, const HJBIProblem& problem,
                         const SchemeParams& params, double tol, int max_iter,
                         const std::optional<DiscreteFunction>& initial) {
  const Assembler assembler(std::move(space));
  HowardOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  return howard_solve(assembler, problem, params, options, initial);
}

}  // namespace hjbi
