#include "hjbi/fe_space.hpp"

#include <cmath>
#include <map>
#include <ostream>

namespace hjbi {

LagrangeBasis::LagrangeBasis(int degree) : degree_(degree) {
  require(degree >= 1, "Lagrange basis degree must be >= 1");
  for (int j = 0; j <= degree; ++j)
    for (int i = 0; i + j <= degree; ++i) nodes_.emplace_back(double(i) / degree, double(j) / degree);
  for (int d = 0; d <= degree; ++d)
    for (int b = 0; b <= d; ++b) exponents_.push_back({d - b, b});

  const int n = size();
  Eigen::MatrixXd vandermonde(n, n);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < n; ++k)
      vandermonde(r, k) = std::pow(nodes_[r].x(), exponents_[k][0]) * std::pow(nodes_[r].y(), exponents_[k][1]);
  coefficients_ = vandermonde.fullPivLu().inverse();
}

void LagrangeBasis::evaluate(const Vec2& xi, std::span<Jet> out) const {
  const int n = size();
  // Powers x^k, y^k for k up to the degree.
  double px[16], py[16];
  px[0] = py[0] = 1.0;
  for (int k = 1; k <= degree_; ++k) {
    px[k] = px[k - 1] * xi.x();
    py[k] = py[k - 1] * xi.y();
  }
  auto pw = [](const double* p, int k) { return k >= 0 ? p[k] : 0.0; };

  for (int b = 0; b < n; ++b) out[b] = Jet{};
  for (int k = 0; k < n; ++k) {
    const int a = exponents_[k][0];
    const int c = exponents_[k][1];
    const double v = px[a] * py[c];
    const double dx = a * pw(px, a - 1) * py[c];
    const double dy = c * px[a] * pw(py, c - 1);
    const double dxx = a * (a - 1) * pw(px, a - 2) * py[c];
    const double dxy = a * c * pw(px, a - 1) * pw(py, c - 1);
    const double dyy = c * (c - 1) * px[a] * pw(py, c - 2);
    for (int b = 0; b < n; ++b) {
      const double w = coefficients_(k, b);
      if (w == 0.0) continue;
      Jet& jet = out[b];
      jet.value += w * v;
      jet.gradient.x() += w * dx;
      jet.gradient.y() += w * dy;
      jet.hessian(0, 0) += w * dxx;
      jet.hessian(0, 1) += w * dxy;
      jet.hessian(1, 1) += w * dyy;
    }
  }
  for (int b = 0; b < n; ++b) out[b].hessian(1, 0) = out[b].hessian(0, 1);
}

FESpace::FESpace(std::shared_ptr<const PeriodicMesh> mesh, int degree, Continuity continuity)
    : mesh_(std::move(mesh)), basis_((require(degree >= 2, "polynomial degree must be >= 2"), degree)),
      continuity_(continuity) {
  require(degree <= 15, "polynomial degree above supported maximum 15");
  const int nloc = n_local();
  const auto n_elem = static_cast<int>(mesh_->n_elements());
  elem_dofs_.resize(static_cast<std::size_t>(n_elem) * nloc);
  if (continuity_ == Continuity::discontinuous) {
    for (std::size_t i = 0; i < elem_dofs_.size(); ++i) elem_dofs_[i] = static_cast<int>(i);
    n_dofs_ = static_cast<int>(elem_dofs_.size());
    return;
  }
  // Nodes lie on the lattice of spacing 1/(m p); identify them modulo 1.
  const long period = static_cast<long>(mesh_->subdivisions()) * degree;
  auto wrap = [period](long k) { return ((k % period) + period) % period; };
  std::map<std::pair<long, long>, int> ids;
  for (int e = 0; e < n_elem; ++e) {
    const ElementMap& map = mesh_->map(e);
    for (int k = 0; k < nloc; ++k) {
      const Vec2 x = map.to_physical(basis_.nodes()[k]);
      const std::pair<long, long> key{wrap(std::lround(x.x() * period)), wrap(std::lround(x.y() * period))};
      auto [it, inserted] = ids.emplace(key, static_cast<int>(ids.size()));
      elem_dofs_[static_cast<std::size_t>(e) * nloc + k] = it->second;
    }
  }
  n_dofs_ = static_cast<int>(ids.size());
}

void FESpace::basis_jets(int element, const Vec2& xi, std::span<Jet> out) const {
  basis_.evaluate(xi, out);
  const ElementMap& map = mesh_->map(element);
  for (Jet& jet : out.first(static_cast<std::size_t>(n_local()))) jet = push_forward(jet, map);
}

DiscreteFunction::DiscreteFunction(std::shared_ptr<const FESpace> space)
    : space_(std::move(space)), coeffs_(Eigen::VectorXd::Zero(space_->n_dofs())) {}

DiscreteFunction::DiscreteFunction(std::shared_ptr<const FESpace> space, Eigen::VectorXd coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  require(coeffs_.size() == space_->n_dofs(), "coefficient vector length does not match the space");
}

Jet DiscreteFunction::eval(int element, const Vec2& xi) const {
  std::vector<Jet> jets(space_->n_local());
  space_->basis_jets(element, xi, jets);
  const auto dofs = space_->element_dofs(element);
  Jet out;
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    const double c = coeffs_[dofs[k]];
    out.value += c * jets[k].value;
    out.gradient += c * jets[k].gradient;
    out.hessian += c * jets[k].hessian;
  }
  return out;
}

Jet DiscreteFunction::eval_at(const Vec2& x) const {
  const auto loc = space_->mesh().locate(x);
  return eval(loc.element, loc.reference);
}

DiscreteFunction interpolate(std::shared_ptr<const FESpace> space, const ScalarField& f) {
  DiscreteFunction u(space);
  std::vector<char> done(space->n_dofs(), 0);
  const auto& nodes = space->basis().nodes();
  for (int e = 0; e < static_cast<int>(space->mesh().n_elements()); ++e) {
    const ElementMap& map = space->mesh().map(e);
    const auto dofs = space->element_dofs(e);
    for (std::size_t k = 0; k < dofs.size(); ++k) {
      if (done[dofs[k]]) continue;
      u.coeffs()[dofs[k]] = f(map.to_physical(nodes[k]));
      done[dofs[k]] = 1;
    }
  }
  return u;
}

DiscreteFunction prolongate(const DiscreteFunction& coarse, std::shared_ptr<const FESpace> fine) {
  const PeriodicMesh& coarse_mesh = coarse.space().mesh();
  const PeriodicMesh& fine_mesh = fine->mesh();
  DiscreteFunction u(fine);
  const auto& nodes = fine->basis().nodes();
  for (int e = 0; e < static_cast<int>(fine_mesh.n_elements()); ++e) {
    const int parent = coarse_mesh.locate(fine_mesh.centroid(e)).element;
    const ElementMap& map = fine_mesh.map(e);
    const auto dofs = fine->element_dofs(e);
    for (std::size_t k = 0; k < dofs.size(); ++k) {
      const Vec2 x = map.to_physical(nodes[k]);
      u.coeffs()[dofs[k]] = coarse.eval(parent, coarse_mesh.map(parent).to_reference(x)).value;
    }
  }
  return u;
}

std::pair<Vec2, Vec2> face_reference_points(const PeriodicMesh& mesh, const Face& face, double t) {
  const Vec2 xi_plus = reference_edge_point(face.local_edge_plus, t);
  const Vec2 x = mesh.map(face.elem_plus).to_physical(xi_plus);
  const Vec2 xi_minus = mesh.map(face.elem_minus).to_reference(x - face.offset);
  return {xi_plus, xi_minus};
}

FaceTrace face_trace(const DiscreteFunction& u, const Face& face, double t) {
  const auto [xi_plus, xi_minus] = face_reference_points(u.space().mesh(), face, t);
  return {u.eval(face.elem_plus, xi_plus), u.eval(face.elem_minus, xi_minus)};
}

void write_nodal_csv(const DiscreteFunction& u, std::ostream& os) {
  os.precision(17);
  os << "element,xi,eta,value\n";
  const auto& nodes = u.space().basis().nodes();
  for (int e = 0; e < static_cast<int>(u.space().mesh().n_elements()); ++e) {
    const auto dofs = u.space().element_dofs(e);
    for (std::size_t k = 0; k < dofs.size(); ++k)
      os << e << ',' << nodes[k].x() << ',' << nodes[k].y() << ',' << u.coeffs()[dofs[k]] << '\n';
  }
}

}  // namespace hjbi
