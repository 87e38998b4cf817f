#include <gtest/gtest.h>

#include <random>

#include "hetquad/diagonal.hpp"
#include "hetquad/hppca.hpp"
#include "hetquad/sdp.hpp"
#include "oracles.hpp"

using namespace hetquad;

namespace {

Matrix example_values() {
  Matrix v(2, 3);
  v << 3, 1, 0, 0, 2, 1;
  return v;
}

ProblemInstance from_values(const Matrix& vals, const Matrix& q) {
  std::vector<SymMat> mats;
  for (int i = 0; i < vals.rows(); ++i)
    mats.emplace_back(q * Matrix(vals.row(i).transpose().asDiagonal()) * q.transpose());
  return ProblemInstance(mats);
}

Matrix random_values(int k, int d, std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix v(k, d);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) v(i, j) = u(g);
  return v;
}

}  // namespace

TEST(JointDiagonalize, AlreadyDiagonal) {
  auto c = from_values(example_values(), Matrix::Identity(3, 3));
  auto jd = joint_diagonalize(c);
  ASSERT_TRUE(jd.has_value());
  EXPECT_LE(jd->off_diag_residual, 1e-12);
  Matrix q = jd->basis.mat().cwiseAbs();
  // A signed permutation: each row and column has a single unit entry.
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(q.row(i).maxCoeff(), 1.0, 1e-12);
    EXPECT_NEAR(q.col(i).sum(), 1.0, 1e-12);
  }
}

TEST(JointDiagonalize, ConjugatedTupleAndPermutationInvariance) {
  std::mt19937_64 g(2);
  Matrix q = oracle::random_orthogonal(6, g);
  Matrix vals = random_values(3, 6, g);
  auto c = from_values(vals, q);
  auto jd = joint_diagonalize(c);
  ASSERT_TRUE(jd.has_value());
  EXPECT_LE(jd->off_diag_residual, 1e-10);
  for (int i = 0; i < 3; ++i) {
    Matrix back = jd->basis.mat().transpose() * c[i].mat() * jd->basis.mat();
    EXPECT_NEAR((Vector(back.diagonal()) - Vector(jd->diag_values.row(i).transpose())).norm(), 0.0, 1e-12);
  }
  ProblemInstance perm({c[2], c[0], c[1]});
  auto jp = joint_diagonalize(perm);
  ASSERT_TRUE(jp.has_value());
  EXPECT_LE(jp->off_diag_residual, 1e-10);
  EXPECT_NEAR(oracle::enumerate_assignment(jd->diag_values), oracle::enumerate_assignment(vals), 1e-12);
}

TEST(JointDiagonalize, SampledHppcaIsNotJointlyDiagonalizable) {
  auto model = make_hppca_model(8, 3, default_lambdas(3), Vector::LinSpaced(2, 1, 4), {5, 20}, 3);
  auto c = build_instance(model, sample(model));
  EXPECT_GT(instance_metrics(c).max_commuting_distance, 1e-8);
  EXPECT_FALSE(joint_diagonalize(c).has_value());
}

TEST(SolveAssignment, Example) {
  auto s = solve_assignment(example_values());
  EXPECT_EQ(s.assignment, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(s.value, 5.0);
  EXPECT_TRUE(s.unique);
  EXPECT_DOUBLE_EQ(s.second_best, 4.0);
}

TEST(SolveAssignment, SingleRowPicksMax) {
  Matrix v(1, 4);
  v << 0.2, 0.9, 0.1, 0.5;
  auto s = solve_assignment(v);
  EXPECT_EQ(s.assignment[0], 1);
  EXPECT_DOUBLE_EQ(s.value, 0.9);
}

TEST(SolveAssignment, AllEqualReportsTie) {
  auto s = solve_assignment(Matrix::Constant(3, 4, 0.7));
  EXPECT_NEAR(s.value, 2.1, 1e-15);
  EXPECT_FALSE(s.unique);
}

TEST(SolveAssignment, TooManyRowsThrows) {
  EXPECT_THROW(solve_assignment(Matrix::Ones(3, 2)), DimensionMismatch);
}

TEST(SolveAssignment, MatchesEnumerationAndDualIsOptimal) {
  std::mt19937_64 g(42);
  for (int t = 0; t < 300; ++t) {
    int d = 1 + static_cast<int>(g() % 8);
    int k = 1 + static_cast<int>(g() % std::min(4, d));
    Matrix v = random_values(k, d, g);
    if (t % 5 == 0) v = (v * 4).array().round() / 4;  // integer-ish, exercises ties
    double ref = oracle::enumerate_assignment(v);
    auto s = solve_assignment(v);
    EXPECT_NEAR(s.value, ref, 1e-12);
    double direct = 0.0;
    for (int i = 0; i < k; ++i) direct += v(i, s.assignment[i]);
    EXPECT_NEAR(direct, ref, 1e-12);
    const auto& du = s.dual;
    EXPECT_GE(du.y.minCoeff(), -1e-12);
    EXPECT_GE(du.z.minCoeff(), -1e-12);
    for (int i = 0; i < k; ++i) {
      EXPECT_NEAR(du.z(i, s.assignment[i]), 0.0, 1e-12);
      for (int j = 0; j < d; ++j) EXPECT_NEAR(du.z(i, j), du.y(j) + du.nu(i) - v(i, j), 1e-12);
    }
    EXPECT_NEAR(du.y.sum() + du.nu.sum(), ref, 1e-10);
  }
}

TEST(GoldmanTucker, ExampleHasFullRankProfile) {
  auto vals = example_values();
  auto s = solve_assignment(vals);
  auto dual = goldman_tucker_dual(vals, s);
  EXPECT_EQ(dual_rank_profile(dual), (std::vector<int>{2, 2}));
  auto c = from_values(vals, Matrix::Identity(3, 3));
  SdpPrimalSolution p{assignment_primal(Matrix::Identity(3, 3), s.assignment), -s.value};
  for (double r : check_kkt(c, p, dual)) EXPECT_LE(r, 1e-9);
  EXPECT_NEAR(dual.objective, -s.value, 1e-9);
}

TEST(GoldmanTucker, SingleBrockett) {
  Matrix v(1, 2);
  v << 3, 1;
  auto dual = goldman_tucker_dual(v, solve_assignment(v));
  EXPECT_EQ(dual_rank_profile(dual), std::vector<int>{1});
}

TEST(GoldmanTucker, TieThrows) {
  Matrix v(1, 2);
  v << 1, 1;
  EXPECT_THROW(goldman_tucker_dual(v, solve_assignment(v)), TieError);
}

TEST(GoldmanTucker, RotatedBasisPassesKkt) {
  std::mt19937_64 g(7);
  for (int t = 0; t < 30; ++t) {
    int d = 2 + t % 7, k = 1 + t % std::min(4, d);
    Matrix q = oracle::random_orthogonal(d, g);
    Matrix vals = random_values(k, d, g);
    auto c = from_values(vals, q);
    auto s = solve_assignment(vals);
    ASSERT_TRUE(s.unique);
    auto dual = goldman_tucker_dual(vals, s, &q);
    for (int r : dual_rank_profile(dual)) EXPECT_EQ(r, d - 1);
    SdpPrimalSolution p{assignment_primal(q, s.assignment), -s.value};
    for (double r : check_kkt(c, p, dual)) EXPECT_LE(r, 1e-9);
  }
}

TEST(TightnessSweep, ZeroScaleIsAlwaysTight) {
  Matrix vals(2, 4);
  vals << 1.0, 0.3, 0.1, 0.0, 0.1, 0.8, 0.2, 0.0;
  auto res = tightness_sweep(from_values(vals, Matrix::Identity(4, 4)), 0.0, 5, 1);
  EXPECT_EQ(res.trials, 5);
  EXPECT_DOUBLE_EQ(res.fraction_tight, 1.0);
  EXPECT_EQ(res.failures, 0);
}
