#pragma once

#include "hjbi/fe_space.hpp"
#include "hjbi/hjbi_problem.hpp"
#include "hjbi/quadrature.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <memory>
#include <vector>

namespace hjbi {

/// Parameters of the scheme a_T(w,v) = (F_gamma[w], L_lambda v) + theta S_T(w,v) + J_T(w,v).
struct SchemeParams {
  double theta = 0.5;
  double eta1 = 10.0;
  double eta2 = 10.0;
  double lambda = 1.0;

  /// eta1 = eta2 = 2.5 p^2.
  static SchemeParams defaults(int degree, double lambda, double theta);
  void validate() const;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct AssembledSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  /// The same system tested and tried with the constant function, computed
  /// without cancellation (stabilisation and jump terms vanish on constants):
  /// matrix * 1, 1^T * matrix, 1^T * matrix * 1 and 1^T * rhs. Empty when unknown.
  Eigen::VectorXd constant_action;
  Eigen::VectorXd constant_test;
  double constant_pair = 0.0;
  double constant_rhs = 0.0;
};

/// Jumps and averages of one function at a face quadrature point, in the
/// form the stabilisation and penalty forms consume.
struct FaceJet {
  double jump = 0.0;             ///< [v]
  Vec2 jump_grad = Vec2::Zero();  ///< [grad v]
  double jump_dn = 0.0;          ///< [grad v . n]
  double jump_dt = 0.0;          ///< [grad v . t]
  double avg_dtt = 0.0;          ///< {t^T D^2 v t}, the tangential Laplacian
  double avg_dnt = 0.0;          ///< {n^T D^2 v t}, tangential derivative of the normal derivative

  FaceJet& operator+=(const FaceJet& o);
  FaceJet scaled(double s) const;
};

/// Face integrand of S_T (without the volume part).
inline double stabilization_face(const FaceJet& w, const FaceJet& v) {
  return w.avg_dtt * v.jump_dn + v.avg_dtt * w.jump_dn - w.avg_dnt * v.jump_dt - v.avg_dnt * w.jump_dt;
}

/// Volume integrand of S_T.
inline double stabilization_volume(const Mat2& hw, const Mat2& hv) {
  return frobenius(hw, hv) - hw.trace() * hv.trace();
}

/// Discrete forms and Howard linearisation over one FE space. Face traces of
/// the basis are tabulated once at construction.
class Assembler {
 public:
  explicit Assembler(std::shared_ptr<const FESpace> space);
  Assembler(std::shared_ptr<const FESpace> space, QuadratureRule rule);

  const FESpace& space() const { return *space_; }
  std::shared_ptr<const FESpace> space_ptr() const { return space_; }
  const QuadratureRule& rule() const { return rule_; }
  std::size_t points_per_element() const { return rule_.triangle_weights().size(); }
  std::size_t n_volume_points() const { return space_->mesh().n_elements() * points_per_element(); }

  /// Physical position and weight (including the Jacobian) of volume point q of element e.
  Vec2 volume_point(int element, std::size_t q) const;
  double volume_weight(int element, std::size_t q) const;

  /// Jets of u at every volume quadrature point, element-major.
  std::vector<Jet> volume_jets(const DiscreteFunction& u) const;

  /// Pointwise optimal controls of F_gamma[u] at every volume quadrature point.
  std::vector<PointEval> policy(const HJBIProblem& problem, const DiscreteFunction& u) const;

  /// r_i = a_T(u, phi_i) evaluated by quadrature.
  Eigen::VectorXd residual(const HJBIProblem& problem, const SchemeParams& params, const DiscreteFunction& u) const;
  /// Same, reusing F_gamma[u] values from an existing policy evaluation of u.
  Eigen::VectorXd residual(const std::vector<PointEval>& evals, const SchemeParams& params,
                           const DiscreteFunction& u) const;

  /// Frozen-coefficient matrix and right-hand side for one Howard step.
  AssembledSystem linearized(const SchemeParams& params, const std::vector<PointEval>& frozen) const;

  /// S_T(w, v).
  double stabilization(const DiscreteFunction& w, const DiscreteFunction& v) const;
  /// J_T(w, v).
  double penalty(const SchemeParams& params, const DiscreteFunction& w, const DiscreteFunction& v) const;

  /// Per-quadrature-point jump data of u on face f.
  std::vector<FaceJet> face_jets(const DiscreteFunction& u, int face) const;

  /// Global DOFs of the plus element followed by the minus element.
  std::span<const int> face_dofs(int face) const;
  /// Tabulated basis jump data on face f, point q: 2 * n_local entries.
  std::span<const FaceJet> face_basis(int face, std::size_t q) const;
  double face_weight(int face, std::size_t q) const;

 private:
  std::shared_ptr<const FESpace> space_;
  QuadratureRule rule_;
  std::vector<Jet> ref_volume_;      // [q * nloc + k]
  std::vector<int> face_dofs_;       // [f * 2 nloc + k]
  std::vector<FaceJet> face_basis_;  // [(f * nqf + q) * 2 nloc + k]

  void tabulate_faces();
};

/// Free-function forms, matching the operation names of the scheme.
Eigen::VectorXd residual(const Assembler& assembler, const HJBIProblem& problem, const SchemeParams& params,
                         const DiscreteFunction& u);
double stabilization_S(const Assembler& assembler, const DiscreteFunction& w, const DiscreteFunction& v);
double penalty_J(const Assembler& assembler, const SchemeParams& params, const DiscreteFunction& w,
                 const DiscreteFunction& v);
AssembledSystem linearized_matrix(const Assembler& assembler, const SchemeParams& params,
                                  const std::vector<PointEval>& frozen);

/// Coordinate dump: one `row col value` line per stored entry.
void write_matrix(const SparseMatrix& matrix, std::ostream& os);

}  // namespace hjbi
