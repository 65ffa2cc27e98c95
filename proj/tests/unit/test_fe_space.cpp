#include "hjbi/fe_space.hpp"
#include "hjbi/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace hjbi;

namespace {

std::shared_ptr<const FESpace> make(int m, int p, Continuity c) {
  return std::make_shared<const FESpace>(std::make_shared<const PeriodicMesh>(PeriodicMesh::uniform(m)), p, c);
}

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

TEST(Quadrature, TriangleMonomialsExact) {
  for (int k : {4, 10, 20}) {
    const QuadratureRule rule(k, k);
    double wsum = 0.0;
    for (double w : rule.triangle_weights()) {
      EXPECT_GT(w, 0.0);
      wsum += w;
    }
    EXPECT_NEAR(wsum, 0.5, 1e-14);
    for (int d = 0; d <= k; ++d)
      for (int e = 0; d + e <= k; ++e) {
        double q = 0.0;
        for (std::size_t i = 0; i < rule.triangle_points().size(); ++i)
          q += rule.triangle_weights()[i] * std::pow(rule.triangle_points()[i].x(), d) *
               std::pow(rule.triangle_points()[i].y(), e);
        EXPECT_NEAR(q, factorial(d) * factorial(e) / factorial(d + e + 2), 1e-13) << d << "," << e;
      }
  }
}

TEST(Quadrature, EdgeMonomialsExact) {
  const QuadratureRule rule(6, 15);
  for (int d = 0; d <= 15; ++d) {
    double q = 0.0;
    for (std::size_t i = 0; i < rule.edge_points().size(); ++i)
      q += rule.edge_weights()[i] * std::pow(rule.edge_points()[i], d);
    EXPECT_NEAR(q, 1.0 / (d + 1), 1e-14);
  }
}

TEST(Basis, NodalAndPartitionOfUnity) {
  for (int p = 1; p <= 6; ++p) {
    const LagrangeBasis b(p);
    ASSERT_EQ(b.size(), (p + 1) * (p + 2) / 2);
    std::vector<Jet> jets(b.size());
    for (int i = 0; i < b.size(); ++i) {
      b.evaluate(b.nodes()[i], jets);
      for (int j = 0; j < b.size(); ++j) EXPECT_NEAR(jets[j].value, i == j ? 1.0 : 0.0, 1e-10);
    }
    b.evaluate(Vec2(0.21, 0.33), jets);
    double s = 0.0;
    Vec2 g = Vec2::Zero();
    for (const Jet& j : jets) {
      s += j.value;
      g += j.gradient;
    }
    EXPECT_NEAR(s, 1.0, 1e-11);
    EXPECT_NEAR(g.norm(), 0.0, 1e-9);
  }
}

TEST(FESpace, DofCounts) {
  EXPECT_EQ(make(2, 2, Continuity::discontinuous)->n_dofs(), 48);
  EXPECT_EQ(make(2, 2, Continuity::continuous)->n_dofs(), 16);
  for (int m : {1, 2, 3, 5}) {
    EXPECT_EQ(make(m, 2, Continuity::discontinuous)->n_dofs(), 12 * m * m);
    EXPECT_EQ(make(m, 2, Continuity::continuous)->n_dofs(), 4 * m * m);
  }
}

TEST(FESpace, C0CubicCountMatchesNodeDeduplication) {
  for (int m : {2, 3}) {
    const auto space = make(m, 3, Continuity::continuous);
    std::set<std::pair<long, long>> nodes;
    const PeriodicMesh& mesh = space->mesh();
    for (std::size_t e = 0; e < mesh.n_elements(); ++e)
      for (const Vec2& xi : space->basis().nodes()) {
        const Vec2 x = mesh.map(int(e)).to_physical(xi);
        auto wrap = [](double v) {
          double w = v - std::floor(v);
          long k = std::lround(w * 3e6);
          return k % 3000000;
        };
        nodes.insert({wrap(x.x()), wrap(x.y())});
      }
    EXPECT_EQ(long(nodes.size()), space->n_dofs());
    EXPECT_EQ(space->n_dofs(), 9 * m * m);
  }
}

TEST(FESpace, DiscontinuousDofsAreNotShared) {
  const auto space = make(3, 2, Continuity::discontinuous);
  std::set<int> seen;
  for (std::size_t e = 0; e < space->mesh().n_elements(); ++e)
    for (int d : space->element_dofs(int(e))) EXPECT_TRUE(seen.insert(d).second);
}

TEST(FESpace, PolynomialReproduction) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto space = make(3, 2, Continuity::discontinuous);
  const DiscreteFunction q = interpolate(space, [](const Vec2& y) { return y.x() * y.x() - 0.5 * y.x() * y.y() + 3.0; });
  const DiscreteFunction one = interpolate(make(3, 3, Continuity::continuous), [](const Vec2&) { return 1.0; });
  for (int k = 0; k < 20; ++k) {
    const Vec2 y(u(rng) * 0.999, u(rng) * 0.999);
    const Jet j = q.eval_at(y);
    EXPECT_NEAR(j.value, y.x() * y.x() - 0.5 * y.x() * y.y() + 3.0, 1e-12);
    EXPECT_NEAR(j.hessian(0, 0), 2.0, 1e-9);
    EXPECT_NEAR(j.hessian(0, 1), -0.5, 1e-9);
    EXPECT_NEAR(j.hessian(1, 1), 0.0, 1e-9);
    const Jet c = one.eval_at(y);
    EXPECT_NEAR(c.value, 1.0, 1e-12);
    EXPECT_NEAR(c.gradient.norm(), 0.0, 1e-10);
  }
}

TEST(FESpace, SmoothInterpolationError) {
  constexpr double tau = 2.0 * std::numbers::pi;
  auto f = [](const Vec2& y) { return std::cos(tau * y.x()) * std::cos(tau * y.y()); };
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double prev = 0.0;
  for (int m : {4, 8}) {
    const DiscreteFunction v = interpolate(make(m, 3, Continuity::continuous), f);
    double err = 0.0;
    for (int k = 0; k < 200; ++k) {
      const Vec2 y(u(rng), u(rng));
      err = std::max(err, std::abs(v.eval_at(y).value - f(y)));
    }
    if (prev > 0.0) EXPECT_GT(prev / err, 10.0);  // O(h^4): ideal ratio 16
    prev = err;
  }
}

TEST(FESpace, TraceSignConvention) {
  const auto space = make(2, 0 + 2, Continuity::discontinuous);
  const PeriodicMesh& mesh = space->mesh();
  const Face& face = mesh.faces()[0];
  DiscreteFunction u(space);
  for (int d : space->element_dofs(face.elem_minus)) u.coeffs()[d] = 1.0;
  for (double t : {0.1, 0.5, 0.9}) EXPECT_NEAR(face_trace(u, face, t).jump(), -1.0, 1e-12);
}

TEST(FESpace, ContinuousTracesAgreeOnAllFaces) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto space = make(3, 3, Continuity::continuous);
  DiscreteFunction v(space);
  for (Eigen::Index i = 0; i < v.coeffs().size(); ++i) v.coeffs()[i] = u(rng);
  for (const Face& f : space->mesh().faces())
    for (double t : {0.0, 0.3, 0.77, 1.0}) EXPECT_NEAR(face_trace(v, f, t).jump(), 0.0, 1e-12);
}

TEST(FESpace, ProlongationIsExactOnNestedMeshes) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto coarse = make(2, 3, Continuity::continuous);
  const auto fine = make(4, 3, Continuity::continuous);
  DiscreteFunction v(coarse);
  for (Eigen::Index i = 0; i < v.coeffs().size(); ++i) v.coeffs()[i] = u(rng);
  const DiscreteFunction w = prolongate(v, fine);
  for (int k = 0; k < 50; ++k) {
    const Vec2 y(0.5 * (u(rng) + 1.0), 0.5 * (u(rng) + 1.0));
    EXPECT_NEAR(w.eval_at(y).value, v.eval_at(y).value, 1e-11);
  }
}
