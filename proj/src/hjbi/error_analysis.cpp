#include "hjbi/error_analysis.hpp"

#include "hjbi/parallel.hpp"

#include <cmath>
#include <ostream>

namespace hjbi {

double NormParts::norm(double lambda) const { return std::sqrt(squared(lambda)); }

namespace {

/// Element-wise quadrature of the three volume parts of (u_T - reference).
template <class ReferenceJet>
NormParts volume_parts(const Assembler& assembler, const DiscreteFunction& u_T, ReferenceJet&& reference) {
  const PeriodicMesh& mesh = assembler.space().mesh();
  const std::size_t ne = mesh.n_elements();
  const std::size_t nq = assembler.points_per_element();
  const std::vector<Jet> jets = assembler.volume_jets(u_T);
  std::vector<double> hess(ne), grad(ne), val(ne);
  parallel_for(ne, [&](std::size_t e) {
    double a = 0.0, b = 0.0, c = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const std::size_t i = e * nq + q;
      const Jet ref = reference(static_cast<int>(e), q, i);
      const double w = assembler.volume_weight(static_cast<int>(e), q);
      a += w * (jets[i].hessian - ref.hessian).squaredNorm();
      b += w * (jets[i].gradient - ref.gradient).squaredNorm();
      c += w * (jets[i].value - ref.value) * (jets[i].value - ref.value);
    }
    hess[e] = a;
    grad[e] = b;
    val[e] = c;
  });
  NormParts p;
  p.hessian = pairwise_sum(hess);
  p.gradient = pairwise_sum(grad);
  p.value = pairwise_sum(val);
  return p;
}

double jump_squared(const Assembler& assembler, const DiscreteFunction& v) {
  const PeriodicMesh& mesh = assembler.space().mesh();
  std::vector<double> parts(mesh.n_faces());
  parallel_for(mesh.n_faces(), [&](std::size_t f) {
    const int face = static_cast<int>(f);
    const double h = mesh.faces()[f].h;
    const std::vector<FaceJet> jets = assembler.face_jets(v, face);
    double s = 0.0;
    for (std::size_t q = 0; q < jets.size(); ++q)
      s += assembler.face_weight(face, q) *
           (jets[q].jump_grad.squaredNorm() / h + jets[q].jump * jets[q].jump / (h * h * h));
    parts[f] = s;
  });
  return pairwise_sum(parts);
}

}  // namespace

NormParts norm_parts(const Assembler& assembler, const DiscreteFunction& u_T, const ExactSolution& reference) {
  NormParts p = volume_parts(assembler, u_T, [&](int e, std::size_t q, std::size_t) {
    const Vec2 x = assembler.volume_point(e, q);
    return Jet{reference.value(x), reference.gradient(x), reference.hessian(x)};
  });
  p.jump = jump_squared(assembler, u_T);
  return p;
}

NormParts norm_parts(const Assembler& assembler, const DiscreteFunction& u_T, const DiscreteFunction& reference) {
  require(u_T.coeffs().size() == reference.coeffs().size(),
          "norm_parts: reference must live on the same space");
  const DiscreteFunction diff(u_T.space_ptr(), u_T.coeffs() - reference.coeffs());
  NormParts p = volume_parts(assembler, diff, [](int, std::size_t, std::size_t) { return Jet{}; });
  p.jump = jump_squared(assembler, diff);
  return p;
}

double norm_T_lambda(const Assembler& assembler, double lambda, const DiscreteFunction& u_T,
                     const ExactSolution& reference) {
  require(lambda > 0.0, "lambda must be positive");
  return norm_parts(assembler, u_T, reference).norm(lambda);
}

double norm_T_lambda(const Assembler& assembler, double lambda, const DiscreteFunction& u_T,
                     const DiscreteFunction& reference) {
  require(lambda > 0.0, "lambda must be positive");
  return norm_parts(assembler, u_T, reference).norm(lambda);
}

double jump_seminorm(const Assembler& assembler, const DiscreteFunction& v) {
  return std::sqrt(jump_squared(assembler, v));
}

double estimator_eta(const Assembler& assembler, const HJBIProblem& problem, const DiscreteFunction& u) {
  return estimator_eta(assembler, assembler.policy(problem, u), u);
}

double estimator_eta(const Assembler& assembler, const std::vector<PointEval>& evals, const DiscreteFunction& u) {
  require(evals.size() == assembler.n_volume_points(), "estimator_eta: one evaluation per volume point");
  const std::size_t ne = assembler.space().mesh().n_elements();
  const std::size_t nq = assembler.points_per_element();
  std::vector<double> parts(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    double s = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const double v = evals[e * nq + q].value;
      s += assembler.volume_weight(static_cast<int>(e), q) * v * v;
    }
    parts[e] = s;
  }
  return std::sqrt(pairwise_sum(parts) + jump_squared(assembler, u));
}

double integrate(const Assembler& assembler, const DiscreteFunction& v) {
  const std::size_t ne = assembler.space().mesh().n_elements();
  const std::size_t nq = assembler.points_per_element();
  const std::vector<Jet> jets = assembler.volume_jets(v);
  std::vector<double> parts(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    double s = 0.0;
    for (std::size_t q = 0; q < nq; ++q) s += assembler.volume_weight(static_cast<int>(e), q) * jets[e * nq + q].value;
    parts[e] = s;
  }
  return pairwise_sum(parts);
}

std::vector<ConvergenceRow> observed_orders(std::vector<ConvergenceRow> rows) {
  require(rows.size() >= 2, "observed_orders needs at least two rows");
  auto slope = [](double e0, double e1, double x0, double x1) -> std::optional<double> {
    if (!(e0 > 0.0 && e1 > 0.0 && x0 > 0.0 && x1 > 0.0) || x0 == x1) return std::nullopt;
    return std::log(e1 / e0) / std::log(x1 / x0);
  };
  rows.front().eoc_error = rows.front().eoc_estimator = std::nullopt;
  rows.front().eoc_error_h = rows.front().eoc_estimator_h = std::nullopt;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const ConvergenceRow& a = rows[k - 1];
    ConvergenceRow& b = rows[k];
    const double n0 = static_cast<double>(a.N), n1 = static_cast<double>(b.N);
    if (auto s = slope(a.error, b.error, n0, n1)) b.eoc_error = -*s;
    if (auto s = slope(a.estimator, b.estimator, n0, n1)) b.eoc_estimator = -*s;
    b.eoc_error_h = slope(a.error, b.error, a.h_max, b.h_max);
    b.eoc_estimator_h = slope(a.estimator, b.estimator, a.h_max, b.h_max);
  }
  return rows;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os) {
  os.precision(10);
  os << "N,h_max,error,estimator,eoc_error,eoc_estimator\n";
  for (const ConvergenceRow& r : rows) {
    os << r.N << ',' << r.h_max << ',' << r.error << ',' << r.estimator << ',';
    if (r.eoc_error) os << *r.eoc_error;
    os << ',';
    if (r.eoc_estimator) os << *r.eoc_estimator;
    os << '\n';
  }
}

}  // namespace hjbi
