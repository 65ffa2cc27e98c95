#include "properties.hpp"

#include <gtest/gtest.h>

using namespace hjbi;

TEST(Properties, LemmaInequalityExp1) {
  const auto c = props::lemma_inequality(props::exp1_problem(), 1000, 1);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Properties, LemmaInequalityExp2) {
  const auto c = props::lemma_inequality(props::exp2_operator(), 1000, 2);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Properties, CordesExp1LambdaOne) {
  const HJBIProblem p = props::exp1_problem();
  ASSERT_EQ(p.lambda, 1.0);
  const auto c = props::cordes_holds(p, 32);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Properties, CordesExp2LambdaQuarter) {
  const HJBIProblem p = props::exp2_operator();
  ASSERT_EQ(p.lambda, 0.25);
  const auto c = props::cordes_holds(p, 32);
  EXPECT_TRUE(c.pass) << c.detail;
}

class Monotonicity : public ::testing::TestWithParam<std::tuple<Continuity, double>> {};

TEST_P(Monotonicity, PositiveConstantOnRandomPairs) {
  const auto [cont, theta] = GetParam();
  double c4 = 0.0, c8 = 0.0;
  const auto a = props::strong_monotonicity(4, 2, cont, theta, 50, 3, &c4);
  EXPECT_TRUE(a.pass) << a.detail;
  const auto b = props::strong_monotonicity(8, 2, cont, theta, 10, 7, &c8);
  EXPECT_TRUE(b.pass) << b.detail;
  // stable under refinement
  EXPECT_GT(c8, 0.25 * c4) << a.detail << " / " << b.detail;
}

INSTANTIATE_TEST_SUITE_P(Schemes, Monotonicity,
                         ::testing::Combine(::testing::Values(Continuity::continuous, Continuity::discontinuous),
                                            ::testing::Values(0.0, 0.5, 1.0)));

TEST(Properties, SingletonHoward) {
  const auto c = props::singleton_howard();
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Properties, JumpsVanishOnC0) {
  const auto c = props::jumps_vanish_on_c0(4);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Properties, NormIdentities) {
  const auto c = props::norm_identities(5);
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Properties, MeshCounts) {
  const auto c = props::mesh_counts();
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Properties, SparseSolveMatchesDenseLU) {
  const auto c = props::sparse_vs_dense(5, 6);
  EXPECT_TRUE(c.pass) << c.detail;
}
