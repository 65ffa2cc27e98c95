#include "hjbi/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hjbi;

namespace {

HJBIProblem laplace_like(double lambda) {
  HJBIProblem p;
  p.name = "laplace";
  p.controls.alpha = {0.0};
  p.controls.beta = {0.0};
  p.lambda = lambda;
  p.coefficients = [lambda](const Vec2&, double, double) {
    Coefficients k;
    k.c = lambda;
    return k;
  };
  return p;
}

}  // namespace

TEST(Renormalization, IdentityOperatorGivesOne) {
  Coefficients k;
  k.c = 1.0;
  EXPECT_DOUBLE_EQ(renormalization(k, 1.0), 1.0);
  k.c = 0.5;
  EXPECT_DOUBLE_EQ(renormalization(k, 0.5), 1.0);
}

TEST(Renormalization, Exp1GammaIsSqrt2CosAlpha) {
  const HJBIProblem p = make_exp1_problem(9, 9);
  for (double a : p.controls.alpha)
    for (double b : p.controls.beta)
      EXPECT_NEAR(p.gamma(Vec2(0.3, 0.7), a, b), std::sqrt(2.0) * std::cos(a), 1e-14);
}

TEST(Renormalization, CellGammaIndependentOfSigma) {
  const EffOperatorData data = make_exp2_data();
  const HJBIProblem a = make_cell_problem(data, Vec2::Zero(), Vec2::Zero(), exp2_matrix_R(), 0.1);
  const HJBIProblem b = make_cell_problem(data, Vec2::Zero(), Vec2::Zero(), exp2_matrix_R(), 0.01);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Vec2 y(u(rng), u(rng));
    const double al = 1.0 + u(rng), be = u(rng);
    EXPECT_EQ(a.gamma(y, al, be), b.gamma(y, al, be));
    const double g = renormalization(Coefficients{data.A(y, al, be), Vec2::Zero(), 1.0, 0.0}, data.lambda);
    EXPECT_NEAR(a.gamma(y, al, be), g, 1e-15 * g);
  }
}

TEST(Cordes, ExamplesHold) {
  EXPECT_TRUE(cordes_check(make_exp1_problem(), 8).holds);
  HJBIProblem op = make_cell_problem(make_exp2_data(), Vec2::Zero(), Vec2::Zero(), exp2_matrix_R(), 1.0);
  EXPECT_EQ(op.lambda, 0.25);
  EXPECT_TRUE(cordes_check(op, 16).holds);
  EXPECT_NEAR(make_exp1_problem().delta, std::cos(1.0), 1e-3);
}

TEST(Cordes, IdentityOperatorAdmitsDeltaOne) {
  const CordesReport r = cordes_check(laplace_like(1.0), 2);
  EXPECT_TRUE(r.holds);
  EXPECT_DOUBLE_EQ(r.max_admissible_delta, 1.0);
}

TEST(Cordes, ZeroReactionIsRejected) {
  HJBIProblem p = laplace_like(1.0);
  p.coefficients = [](const Vec2&, double, double) {
    Coefficients k;
    k.c = 0.0;
    return k;
  };
  try {
    validate_problem(p, 4);
    FAIL() << "expected a Cordes violation";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::cordes_violation);
  }
}

TEST(FGamma, LinearCaseIsLLambda) {
  const HJBIProblem p = laplace_like(1.0);
  Mat2 h;
  h << 1.5, 0.2, 0.2, -0.7;
  const PointEval e = eval_F_gamma(p, Vec2(0.1, 0.2), 0.9, Vec2(3.0, -1.0), h);
  EXPECT_NEAR(e.value, 0.9 - h.trace(), 1e-15);
}

TEST(FGamma, Exp1ExactSolutionIsAZero) {
  const HJBIProblem p = make_exp1_problem();
  const ExactSolution u = cosine_product_solution();
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> r(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Vec2 y(r(rng), r(rng));
    EXPECT_NEAR(eval_F_gamma(p, y, u.value(y), u.gradient(y), u.hessian(y)).value, 0.0, 1e-10);
  }
}

TEST(FGamma, LipschitzBound) {
  for (const HJBIProblem& p : {make_exp1_problem(), make_cell_problem(make_exp2_data(), Vec2::Zero(), Vec2::Zero(),
                                                                      exp2_matrix_R(), 1.0)}) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> r(-5.0, 5.0), unit(0.0, 1.0);
    const double k = std::sqrt(1.0 - p.delta) + std::sqrt(3.0);
    for (int s = 0; s < 1000; ++s) {
      const Vec2 y(unit(rng), unit(rng));
      Mat2 h1, h2;
      const double o1 = r(rng), o2 = r(rng);
      h1 << r(rng), o1, o1, r(rng);
      h2 << r(rng), o2, o2, r(rng);
      const double u1 = r(rng), u2 = r(rng);
      const Vec2 g1(r(rng), r(rng)), g2(r(rng), r(rng));
      const double d = std::abs(eval_F_gamma(p, y, u1, g1, h1).value - eval_F_gamma(p, y, u2, g2, h2).value);
      const double n = std::sqrt((h1 - h2).squaredNorm() + 2 * p.lambda * (g1 - g2).squaredNorm() +
                                 p.lambda * p.lambda * (u1 - u2) * (u1 - u2));
      EXPECT_LE(d, k * n * (1 + 1e-12));
    }
  }
}

TEST(FGamma, BatchAgreesWithPointwise) {
  const HJBIProblem p = make_exp1_problem(7, 5);
  ASSERT_TRUE(static_cast<bool>(p.batch));
  std::vector<Renormalized> table(p.controls.size());
  const Vec2 y(0.23, 0.61);
  p.sample(y, table);
  for (std::size_t ia = 0; ia < p.controls.alpha.size(); ++ia)
    for (std::size_t ib = 0; ib < p.controls.beta.size(); ++ib) {
      const Renormalized r = renormalize(p.coefficients(y, p.controls.alpha[ia], p.controls.beta[ib]), p.lambda);
      const Renormalized& t = table[ia * p.controls.beta.size() + ib];
      EXPECT_NEAR(t.a11, r.a11, 1e-14);
      EXPECT_NEAR(t.a12, r.a12, 1e-14);
      EXPECT_NEAR(t.a22, r.a22, 1e-14);
      EXPECT_NEAR(t.c, r.c, 1e-14);
      EXPECT_NEAR(t.f, r.f, 1e-12);
    }
}

TEST(Exp2Data, CoefficientsAtR) {
  const EffOperatorData d = make_exp2_data();
  EXPECT_DOUBLE_EQ(frobenius(exp2_matrix_B(), exp2_matrix_R()), -18.0);
  const Vec2 y(0.125, 0.0);  // a1 = sin^2(pi/4) + 1 = 1.5
  const HJBIProblem cell = make_cell_problem(d, Vec2::Zero(), Vec2::Zero(), exp2_matrix_R(), 0.5);
  const Coefficients k = cell.coefficients(y, 2.0, 1.0);
  EXPECT_NEAR(k.f, (1.0 + 2.0 * 1.5) * -18.0 + 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(k.c, 0.5);
  EXPECT_DOUBLE_EQ(cell.lambda, 0.125);
}
