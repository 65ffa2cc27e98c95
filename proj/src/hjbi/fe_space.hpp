#pragma once

#include "hjbi/common.hpp"
#include "hjbi/mesh.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace hjbi {

enum class Continuity { discontinuous = 0, continuous = 1 };

/// Value, gradient and Hessian of a function at one point.
struct Jet {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  Mat2 hessian = Mat2::Zero();
};

/// Degree-p Lagrange basis on the reference triangle with uniform nodes
/// (i/p, j/p), i + j <= p. Evaluation goes through the monomial expansion.
class LagrangeBasis {
 public:
  explicit LagrangeBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  /// Reference values/gradients/Hessians of all basis functions at xi.
  void evaluate(const Vec2& xi, std::span<Jet> out) const;

 private:
  int degree_;
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 2>> exponents_;
  Eigen::MatrixXd coefficients_;  // monomial k -> basis n: coefficients_(k, n)
};

/// Map reference jets to the physical element.
inline Jet push_forward(const Jet& ref, const ElementMap& map) {
  Jet out;
  out.value = ref.value;
  out.gradient = map.inverse.transpose() * ref.gradient;
  out.hessian = map.inverse.transpose() * ref.hessian * map.inverse;
  return out;
}

/// Piecewise polynomial space of degree p over a periodic mesh, either fully
/// discontinuous or continuous with periodic identification of boundary nodes.
class FESpace {
 public:
  FESpace(std::shared_ptr<const PeriodicMesh> mesh, int degree, Continuity continuity);

  const PeriodicMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const PeriodicMesh> mesh_ptr() const { return mesh_; }
  int degree() const { return basis_.degree(); }
  Continuity continuity() const { return continuity_; }
  const LagrangeBasis& basis() const { return basis_; }
  int n_local() const { return basis_.size(); }
  int n_dofs() const { return n_dofs_; }

  std::span<const int> element_dofs(int element) const {
    return {elem_dofs_.data() + static_cast<std::size_t>(element) * n_local(), static_cast<std::size_t>(n_local())};
  }

  /// Physical jets of all local basis functions of `element` at reference point xi.
  void basis_jets(int element, const Vec2& xi, std::span<Jet> out) const;

 private:
  std::shared_ptr<const PeriodicMesh> mesh_;
  LagrangeBasis basis_;
  Continuity continuity_;
  int n_dofs_ = 0;
  std::vector<int> elem_dofs_;
};

/// Coefficient vector over an FESpace.
class DiscreteFunction {
 public:
  explicit DiscreteFunction(std::shared_ptr<const FESpace> space);
  DiscreteFunction(std::shared_ptr<const FESpace> space, Eigen::VectorXd coeffs);

  const FESpace& space() const { return *space_; }
  std::shared_ptr<const FESpace> space_ptr() const { return space_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  Jet eval(int element, const Vec2& xi) const;
  /// Evaluate at a physical point; the owning element is found by location.
  Jet eval_at(const Vec2& x) const;

 private:
  std::shared_ptr<const FESpace> space_;
  Eigen::VectorXd coeffs_;
};

using ScalarField = std::function<double(const Vec2&)>;

/// Nodal interpolation. Shared nodes of a continuous space are evaluated once.
DiscreteFunction interpolate(std::shared_ptr<const FESpace> space, const ScalarField& f);

/// Transfer onto a space over a nested finer mesh (exact for nested meshes).
DiscreteFunction prolongate(const DiscreteFunction& coarse, std::shared_ptr<const FESpace> fine);

/// Traces from both sides of a face at edge parameter t in [0,1] (plus-side
/// parametrisation). The minus side is evaluated at the physical point minus
/// the face offset.
struct FaceTrace {
  Jet plus;
  Jet minus;
  double jump() const { return plus.value - minus.value; }
  Vec2 jump_gradient() const { return plus.gradient - minus.gradient; }
  double average() const { return 0.5 * (plus.value + minus.value); }
};
FaceTrace face_trace(const DiscreteFunction& u, const Face& face, double t);

/// Reference points on the plus and minus elements for edge parameter t.
std::pair<Vec2, Vec2> face_reference_points(const PeriodicMesh& mesh, const Face& face, double t);

/// CSV rows `element,xi,eta,value` at every local Lagrange node.
void write_nodal_csv(const DiscreteFunction& u, std::ostream& os);

}  // namespace hjbi
