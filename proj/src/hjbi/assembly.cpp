#include "hjbi/assembly.hpp"

#include "hjbi/parallel.hpp"

#include <ostream>

namespace hjbi {

SchemeParams SchemeParams::defaults(int degree, double lambda, double theta) {
  SchemeParams p;
  p.theta = theta;
  p.eta1 = p.eta2 = 2.5 * degree * degree;
  p.lambda = lambda;
  return p;
}

void SchemeParams::validate() const {
  require(theta >= 0.0 && theta <= 1.0, "theta must lie in [0,1]");
  require(eta1 > 0.0 && eta2 > 0.0, "penalty parameters must be positive");
  require(lambda > 0.0, "lambda must be positive");
}

FaceJet& FaceJet::operator+=(const FaceJet& o) {
  jump += o.jump;
  jump_grad += o.jump_grad;
  jump_dn += o.jump_dn;
  jump_dt += o.jump_dt;
  avg_dtt += o.avg_dtt;
  avg_dnt += o.avg_dnt;
  return *this;
}

FaceJet FaceJet::scaled(double s) const {
  FaceJet r;
  r.jump = s * jump;
  r.jump_grad = s * jump_grad;
  r.jump_dn = s * jump_dn;
  r.jump_dt = s * jump_dt;
  r.avg_dtt = s * avg_dtt;
  r.avg_dnt = s * avg_dnt;
  return r;
}

namespace {

/// Contribution of a one-sided trace: sign +1 on the plus side, -1 on the minus side.
FaceJet one_sided(const Jet& jet, const Vec2& n, const Vec2& t, double sign) {
  FaceJet fj;
  fj.jump = sign * jet.value;
  fj.jump_grad = sign * jet.gradient;
  fj.jump_dn = sign * jet.gradient.dot(n);
  fj.jump_dt = sign * jet.gradient.dot(t);
  fj.avg_dtt = 0.5 * t.dot(jet.hessian * t);
  fj.avg_dnt = 0.5 * n.dot(jet.hessian * t);
  return fj;
}

double penalty_face(const SchemeParams& p, double h, const FaceJet& w, const FaceJet& v) {
  return p.eta1 / h * w.jump_grad.dot(v.jump_grad) + p.eta2 / (h * h * h) * w.jump * v.jump;
}

}  // namespace

Assembler::Assembler(std::shared_ptr<const FESpace> space)
    : Assembler(space, QuadratureRule::for_degree(space->degree())) {}

Assembler::Assembler(std::shared_ptr<const FESpace> space, QuadratureRule rule)
    : space_(std::move(space)), rule_(std::move(rule)) {
  const int nloc = space_->n_local();
  const auto& pts = rule_.triangle_points();
  ref_volume_.resize(pts.size() * nloc);
  for (std::size_t q = 0; q < pts.size(); ++q)
    space_->basis().evaluate(pts[q], std::span<Jet>(ref_volume_.data() + q * nloc, nloc));
  tabulate_faces();
}

void Assembler::tabulate_faces() {
  const PeriodicMesh& mesh = space_->mesh();
  const int nloc = space_->n_local();
  const std::size_t nqf = rule_.edge_points().size();
  const std::size_t nf = mesh.n_faces();
  face_dofs_.resize(nf * 2 * nloc);
  face_basis_.resize(nf * nqf * 2 * nloc);
  std::vector<Jet> plus(nloc), minus(nloc);
  for (std::size_t f = 0; f < nf; ++f) {
    const Face& face = mesh.faces()[f];
    const auto dp = space_->element_dofs(face.elem_plus);
    const auto dm = space_->element_dofs(face.elem_minus);
    std::copy(dp.begin(), dp.end(), face_dofs_.begin() + f * 2 * nloc);
    std::copy(dm.begin(), dm.end(), face_dofs_.begin() + f * 2 * nloc + nloc);
    const Vec2 n = face.normal;
    const Vec2 t(-n.y(), n.x());
    for (std::size_t q = 0; q < nqf; ++q) {
      const auto [xi_p, xi_m] = face_reference_points(mesh, face, rule_.edge_points()[q]);
      space_->basis_jets(face.elem_plus, xi_p, plus);
      space_->basis_jets(face.elem_minus, xi_m, minus);
      FaceJet* out = face_basis_.data() + (f * nqf + q) * 2 * nloc;
      for (int k = 0; k < nloc; ++k) {
        out[k] = one_sided(plus[k], n, t, 1.0);
        out[nloc + k] = one_sided(minus[k], n, t, -1.0);
      }
    }
  }
}

std::span<const int> Assembler::face_dofs(int face) const {
  const auto n = static_cast<std::size_t>(2 * space_->n_local());
  return {face_dofs_.data() + face * n, n};
}

std::span<const FaceJet> Assembler::face_basis(int face, std::size_t q) const {
  const auto n = static_cast<std::size_t>(2 * space_->n_local());
  const std::size_t nqf = rule_.edge_points().size();
  return {face_basis_.data() + (face * nqf + q) * n, n};
}

double Assembler::face_weight(int face, std::size_t q) const {
  return rule_.edge_weights()[q] * space_->mesh().faces()[face].h;
}

Vec2 Assembler::volume_point(int element, std::size_t q) const {
  return space_->mesh().map(element).to_physical(rule_.triangle_points()[q]);
}

double Assembler::volume_weight(int element, std::size_t q) const {
  return rule_.triangle_weights()[q] * space_->mesh().map(element).det;
}

std::vector<Jet> Assembler::volume_jets(const DiscreteFunction& u) const {
  const int nloc = space_->n_local();
  const std::size_t nq = points_per_element();
  std::vector<Jet> out(n_volume_points());
  parallel_for(space_->mesh().n_elements(), [&](std::size_t e) {
    const ElementMap& map = space_->mesh().map(static_cast<int>(e));
    const auto dofs = space_->element_dofs(static_cast<int>(e));
    for (std::size_t q = 0; q < nq; ++q) {
      Jet ref;
      for (int k = 0; k < nloc; ++k) {
        const double c = u.coeffs()[dofs[k]];
        const Jet& b = ref_volume_[q * nloc + k];
        ref.value += c * b.value;
        ref.gradient += c * b.gradient;
        ref.hessian += c * b.hessian;
      }
      out[e * nq + q] = push_forward(ref, map);
    }
  });
  return out;
}

std::vector<PointEval> Assembler::policy(const HJBIProblem& problem, const DiscreteFunction& u) const {
  const std::vector<Jet> jets = volume_jets(u);
  const std::size_t nq = points_per_element();
  std::vector<PointEval> out(jets.size());
  parallel_for(space_->mesh().n_elements(), [&](std::size_t e) {
    ControlSweep sweep(problem);
    for (std::size_t q = 0; q < nq; ++q) {
      const Jet& j = jets[e * nq + q];
      out[e * nq + q] = sweep(volume_point(static_cast<int>(e), q), j.value, j.gradient, j.hessian);
    }
  });
  return out;
}

std::vector<FaceJet> Assembler::face_jets(const DiscreteFunction& u, int face) const {
  const std::size_t nqf = rule_.edge_points().size();
  const auto dofs = face_dofs(face);
  std::vector<FaceJet> out(nqf);
  for (std::size_t q = 0; q < nqf; ++q) {
    const auto basis = face_basis(face, q);
    for (std::size_t k = 0; k < dofs.size(); ++k) out[q] += basis[k].scaled(u.coeffs()[dofs[k]]);
  }
  return out;
}

Eigen::VectorXd Assembler::residual(const HJBIProblem& problem, const SchemeParams& params,
                                    const DiscreteFunction& u) const {
  return residual(policy(problem, u), params, u);
}

Eigen::VectorXd Assembler::residual(const std::vector<PointEval>& evals, const SchemeParams& params,
                                    const DiscreteFunction& u) const {
  params.validate();
  require(evals.size() == n_volume_points(), "residual: one point evaluation per volume quadrature point");
  const PeriodicMesh& mesh = space_->mesh();
  const int nloc = space_->n_local();
  const std::size_t nq = points_per_element();
  const std::vector<Jet> u_jets = volume_jets(u);

  // Element-local contributions first, then a fixed-order scatter.
  std::vector<double> local(mesh.n_elements() * nloc, 0.0);
  parallel_for(mesh.n_elements(), [&](std::size_t e) {
    const ElementMap& map = mesh.map(static_cast<int>(e));
    double* r = local.data() + e * nloc;
    for (std::size_t q = 0; q < nq; ++q) {
      const double w = volume_weight(static_cast<int>(e), q);
      const double fval = evals[e * nq + q].value;
      const Mat2& hu = u_jets[e * nq + q].hessian;
      for (int i = 0; i < nloc; ++i) {
        const Jet phi = push_forward(ref_volume_[q * nloc + i], map);
        const double l_phi = params.lambda * phi.value - phi.hessian.trace();
        r[i] += w * (fval * l_phi + params.theta * stabilization_volume(hu, phi.hessian));
      }
    }
  });

  Eigen::VectorXd out = Eigen::VectorXd::Zero(space_->n_dofs());
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const auto dofs = space_->element_dofs(static_cast<int>(e));
    for (int i = 0; i < nloc; ++i) out[dofs[i]] += local[e * nloc + i];
  }

  const std::size_t nqf = rule_.edge_points().size();
  for (int f = 0; f < static_cast<int>(mesh.n_faces()); ++f) {
    const double h = mesh.faces()[f].h;
    const auto dofs = face_dofs(f);
    const std::vector<FaceJet> uj = face_jets(u, f);
    for (std::size_t q = 0; q < nqf; ++q) {
      const double w = face_weight(f, q);
      const auto basis = face_basis(f, q);
      for (std::size_t i = 0; i < dofs.size(); ++i)
        out[dofs[i]] += w * (params.theta * stabilization_face(uj[q], basis[i]) + penalty_face(params, h, uj[q], basis[i]));
    }
  }
  return out;
}

AssembledSystem Assembler::linearized(const SchemeParams& params, const std::vector<PointEval>& frozen) const {
  params.validate();
  require(frozen.size() == n_volume_points(), "linearized: one frozen evaluation per volume quadrature point");
  const PeriodicMesh& mesh = space_->mesh();
  const int nloc = space_->n_local();
  const std::size_t nq = points_per_element();
  const std::size_t nloc2 = static_cast<std::size_t>(nloc) * nloc;

  std::vector<double> local_m(mesh.n_elements() * nloc2, 0.0);
  std::vector<double> local_r(mesh.n_elements() * nloc, 0.0);
  std::vector<double> local_c(mesh.n_elements() * nloc, 0.0);
  std::vector<double> local_t(mesh.n_elements() * nloc, 0.0);
  std::vector<double> local_cc(mesh.n_elements(), 0.0), local_cf(mesh.n_elements(), 0.0);
  parallel_for(mesh.n_elements(), [&](std::size_t e) {
    const ElementMap& map = mesh.map(static_cast<int>(e));
    double* m = local_m.data() + e * nloc2;
    double* r = local_r.data() + e * nloc;
    double* c = local_c.data() + e * nloc;
    double* t = local_t.data() + e * nloc;
    std::vector<Jet> phi(nloc);
    std::vector<double> test(nloc), trial(nloc);
    for (std::size_t q = 0; q < nq; ++q) {
      const double w = volume_weight(static_cast<int>(e), q);
      const Renormalized& k = frozen[e * nq + q].frozen;
      for (int i = 0; i < nloc; ++i) {
        phi[i] = push_forward(ref_volume_[q * nloc + i], map);
        test[i] = params.lambda * phi[i].value - phi[i].hessian.trace();
        trial[i] = k.apply(phi[i].value, phi[i].gradient, phi[i].hessian) + k.f;
      }
      local_cc[e] += w * params.lambda * k.c;
      local_cf[e] += w * params.lambda * k.f;
      for (int i = 0; i < nloc; ++i) {
        r[i] += w * k.f * test[i];
        c[i] += w * k.c * test[i];
        t[i] += w * params.lambda * trial[i];
        for (int j = 0; j < nloc; ++j)
          m[i * nloc + j] +=
              w * (test[i] * trial[j] + params.theta * stabilization_volume(phi[j].hessian, phi[i].hessian));
      }
    }
  });

  const std::size_t nqf = rule_.edge_points().size();
  const std::size_t nf = mesh.n_faces();
  const std::size_t n2 = 2 * static_cast<std::size_t>(nloc);
  std::vector<double> face_m(nf * n2 * n2, 0.0);
  parallel_for(nf, [&](std::size_t f) {
    const double h = mesh.faces()[f].h;
    double* m = face_m.data() + f * n2 * n2;
    for (std::size_t q = 0; q < nqf; ++q) {
      const double w = face_weight(static_cast<int>(f), q);
      const auto basis = face_basis(static_cast<int>(f), q);
      for (std::size_t i = 0; i < n2; ++i)
        for (std::size_t j = 0; j < n2; ++j)
          m[i * n2 + j] += w * (params.theta * stabilization_face(basis[j], basis[i]) +
                                penalty_face(params, h, basis[j], basis[i]));
    }
  });

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(local_m.size() + face_m.size());
  AssembledSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(space_->n_dofs());
  sys.constant_action = Eigen::VectorXd::Zero(space_->n_dofs());
  sys.constant_test = Eigen::VectorXd::Zero(space_->n_dofs());
  sys.constant_pair = pairwise_sum(local_cc);
  sys.constant_rhs = pairwise_sum(local_cf);
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const auto dofs = space_->element_dofs(static_cast<int>(e));
    for (int i = 0; i < nloc; ++i) {
      sys.rhs[dofs[i]] += local_r[e * nloc + i];
      sys.constant_action[dofs[i]] += local_c[e * nloc + i];
      sys.constant_test[dofs[i]] += local_t[e * nloc + i];
      for (int j = 0; j < nloc; ++j) triplets.emplace_back(dofs[i], dofs[j], local_m[e * nloc2 + i * nloc + j]);
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    const auto dofs = face_dofs(static_cast<int>(f));
    for (std::size_t i = 0; i < n2; ++i)
      for (std::size_t j = 0; j < n2; ++j) triplets.emplace_back(dofs[i], dofs[j], face_m[f * n2 * n2 + i * n2 + j]);
  }
  sys.matrix.resize(space_->n_dofs(), space_->n_dofs());
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  return sys;
}

double Assembler::stabilization(const DiscreteFunction& w, const DiscreteFunction& v) const {
  const PeriodicMesh& mesh = space_->mesh();
  const std::size_t nq = points_per_element();
  const std::vector<Jet> wj = volume_jets(w);
  const std::vector<Jet> vj = volume_jets(v);
  std::vector<double> parts;
  parts.reserve(mesh.n_elements() + mesh.n_faces());
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    double s = 0.0;
    for (std::size_t q = 0; q < nq; ++q)
      s += volume_weight(static_cast<int>(e), q) * stabilization_volume(wj[e * nq + q].hessian, vj[e * nq + q].hessian);
    parts.push_back(s);
  }
  for (int f = 0; f < static_cast<int>(mesh.n_faces()); ++f) {
    const auto a = face_jets(w, f);
    const auto b = face_jets(v, f);
    double s = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) s += face_weight(f, q) * stabilization_face(a[q], b[q]);
    parts.push_back(s);
  }
  return pairwise_sum(parts);
}

double Assembler::penalty(const SchemeParams& params, const DiscreteFunction& w, const DiscreteFunction& v) const {
  const PeriodicMesh& mesh = space_->mesh();
  std::vector<double> parts;
  parts.reserve(mesh.n_faces());
  for (int f = 0; f < static_cast<int>(mesh.n_faces()); ++f) {
    const auto a = face_jets(w, f);
    const auto b = face_jets(v, f);
    double s = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) s += face_weight(f, q) * penalty_face(params, mesh.faces()[f].h, a[q], b[q]);
    parts.push_back(s);
  }
  return pairwise_sum(parts);
}

Eigen::VectorXd residual(const Assembler& assembler, const HJBIProblem& problem, const SchemeParams& params,
                         const DiscreteFunction& u) {
  return assembler.residual(problem, params, u);
}

double stabilization_S(const Assembler& assembler, const DiscreteFunction& w, const DiscreteFunction& v) {
  return assembler.stabilization(w, v);
}

double penalty_J(const Assembler& assembler, const SchemeParams& params, const DiscreteFunction& w,
                 const DiscreteFunction& v) {
  return assembler.penalty(params, w, v);
}

AssembledSystem linearized_matrix(const Assembler& assembler, const SchemeParams& params,
                                  const std::vector<PointEval>& frozen) {
  return assembler.linearized(params, frozen);
}

void write_matrix(const SparseMatrix& matrix, std::ostream& os) {
  os.precision(17);
  for (int r = 0; r < matrix.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace hjbi
