#include "hjbi/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace hjbi;

namespace {

std::shared_ptr<const FESpace> make(int m, int p, Continuity c) {
  return std::make_shared<const FESpace>(std::make_shared<const PeriodicMesh>(PeriodicMesh::uniform(m)), p, c);
}

}  // namespace

TEST(ExactHamiltonian, ReferenceValue) {
  EXPECT_NEAR(exact_H_exp2(exp2_matrix_R()), 38.9429127, 1e-6);
  EXPECT_NEAR(exp2_reference_value(), 38.9429127, 1e-6);
  EXPECT_NEAR(exact_H_exp2(exp2_matrix_R()), exp2_reference_value(), 1e-9);
}

TEST(ExactHamiltonian, Branches) {
  EXPECT_DOUBLE_EQ(exact_H_exp2(Mat2::Zero()), -1.0);
  Mat2 r;
  r << 1.0, 0.0, 0.0, 1.0;  // B:R = 6 > 0
  EXPECT_NEAR(exact_H_exp2(r), -6.0 - 1.0, 1e-12);
}

TEST(CellProblem, ZeroDataGivesZero) {
  EffOperatorData d = make_exp2_data(3, 3, true);
  d.f = [](const Vec2&, const Vec2&, double, double) { return 0.0; };
  const auto space = make(2, 2, Continuity::continuous);
  const Assembler a(space);
  const CorrectorSolve s = solve_corrector(a, d, Vec2::Zero(), Vec2::Zero(), Mat2::Zero(), 0.1,
                                           SchemeParams::defaults(2, 1.0, 0.5), HowardOptions{});
  EXPECT_EQ(s.corrector.coeffs().lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_EQ(s.query.H_T_sigma, 0.0);
}

TEST(CellProblem, ConstantCoefficientsExactForAllSigma) {
  const EffOperatorData d = make_exp2_data(17, 17, true);
  const auto space = make(4, 3, Continuity::continuous);
  const Assembler a(space);
  const std::vector<SigmaRow> rows = sigma_sweep(a, d, Vec2::Zero(), Vec2::Zero(), exp2_matrix_R(),
                                                 {0.1, 0.05, 0.025, 0.0125}, SchemeParams::defaults(3, 1.0, 0.5),
                                                 HowardOptions{}, 17.0);
  for (const SigmaRow& r : rows) {
    EXPECT_NEAR(r.H_T_sigma, 17.0, 1e-10) << r.sigma;
    EXPECT_LE(r.E_T_sigma, 1e-12);
  }
}

TEST(CellProblem, SingleSigmaIsAccurate) {
  const EffOperatorData d = make_exp2_data();
  const auto space = make(4, 3, Continuity::continuous);
  const Assembler a(space);
  const double ref = exp2_reference_value();
  const auto rows = sigma_sweep(a, d, Vec2::Zero(), Vec2::Zero(), exp2_matrix_R(), {0.1},
                                SchemeParams::defaults(3, 1.0, 0.5), HowardOptions{}, ref);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(std::isfinite(rows[0].E_T_sigma));
  EXPECT_LT(rows[0].E_T_sigma, 0.1);
}

TEST(CellProblem, MeshErrorPlateausAtSigmaError) {
  // E_T^sigma decreases under refinement towards the sigma error E^sigma
  const EffOperatorData d = make_exp2_data();
  const double ref = exp2_reference_value();
  std::vector<double> e;
  for (int m : {2, 4, 8}) {
    const auto space = make(m, 3, Continuity::continuous);
    const Assembler a(space);
    const auto rows = sigma_sweep(a, d, Vec2::Zero(), Vec2::Zero(), exp2_matrix_R(), {0.1},
                                  SchemeParams::defaults(3, 1.0, 0.5), HowardOptions{}, ref);
    e.push_back(rows[0].E_T_sigma);
  }
  EXPECT_LT(e[2], e[0]);
  EXPECT_GT(e[2], 0.5e-6);  // E^sigma(0.1) is about 1.2e-6
}

TEST(SigmaSweep, RequiresDecreasingSigmas) {
  const EffOperatorData d = make_exp2_data(3, 3, true);
  const Assembler a(make(2, 2, Continuity::continuous));
  EXPECT_THROW(sigma_sweep(a, d, Vec2::Zero(), Vec2::Zero(), exp2_matrix_R(), {0.05, 0.1},
                           SchemeParams::defaults(2, 1.0, 0.5), HowardOptions{}, 17.0),
               Error);
}

TEST(SigmaSweep, CsvHeaderAndSlope) {
  std::ostringstream os;
  write_sigma_csv({SigmaRow{0.1, 1.0, 0.2, 0.0, 1, true}}, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "sigma,H_T_sigma,E_T_sigma,estimator,iterations");
  EXPECT_NEAR(loglog_slope({0.1, 0.05, 0.025}, {2e-3, 1e-3, 5e-4}), 1.0, 1e-12);
}

TEST(CellProblem, DefinitionalIdentityAndBoundedHessian) {
  const EffOperatorData d = make_exp2_data();
  const auto space = make(4, 3, Continuity::continuous);
  const Assembler a(space);
  const DiscreteFunction zero(space);
  std::vector<double> hess;
  for (double sigma : {0.1, 0.05, 0.025, 0.0125}) {
    const CorrectorSolve s = solve_corrector(a, d, Vec2::Zero(), Vec2::Zero(), exp2_matrix_R(), sigma,
                                             SchemeParams::defaults(3, 1.0, 0.5), HowardOptions{});
    const double mean = integrate(a, s.corrector);
    EXPECT_NEAR(s.query.H_T_sigma, -sigma * mean, 1e-14 * std::abs(s.query.H_T_sigma));
    hess.push_back(std::sqrt(norm_parts(a, s.corrector, zero).hessian));
  }
  EXPECT_LT(hess.back(), 1.5 * hess.front());
}

TEST(CellProblem, DegenerateEllipticityOnConstantVariant) {
  const EffOperatorData d = make_exp2_data(5, 5, true);
  const auto space = make(2, 2, Continuity::continuous);
  const Assembler a(space);
  const Mat2 r2 = exp2_matrix_R();
  for (const Mat2& psd : {Mat2(Mat2::Identity()), Mat2((Mat2() << 1.0, 0.5, 0.5, 0.25).finished()),
                          Mat2((Mat2() << 0.0, 0.0, 0.0, 2.0).finished())}) {
    const double h1 = effective_hamiltonian(a, d, Vec2::Zero(), Vec2::Zero(), r2 + psd, 0.05,
                                            SchemeParams::defaults(2, 1.0, 0.5), HowardOptions{})
                          .H_T_sigma;
    const double h2 = effective_hamiltonian(a, d, Vec2::Zero(), Vec2::Zero(), r2, 0.05,
                                            SchemeParams::defaults(2, 1.0, 0.5), HowardOptions{})
                          .H_T_sigma;
    EXPECT_LE(h1, h2 + 1e-10);
  }
}
