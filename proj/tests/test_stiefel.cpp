#include <gtest/gtest.h>

#include <cmath>

#include "hetquad/generators.hpp"
#include "hetquad/hppca.hpp"
#include "hetquad/rng.hpp"
#include "hetquad/sdp.hpp"
#include "hetquad/stiefel.hpp"
#include "oracles.hpp"

using namespace hetquad;

namespace {

Matrix diag(std::initializer_list<double> v) {
  Vector x(static_cast<int>(v.size()));
  int i = 0;
  for (double a : v) x(i++) = a;
  return x.asDiagonal();
}

ProblemInstance diag_example() { return ProblemInstance({SymMat(diag({3, 1, 0})), SymMat(diag({0, 2, 1}))}); }

Matrix swapped() {
  Matrix u = Matrix::Zero(3, 2);
  u(1, 0) = 1;
  u(0, 1) = 1;
  return u;
}

}  // namespace

TEST(Objective, HandValues) {
  ProblemInstance c({SymMat(diag({3, 1}))});
  EXPECT_DOUBLE_EQ(objective(c, StiefelPoint(Matrix::Identity(2, 1))), 3.0);
  EXPECT_DOUBLE_EQ(objective(diag_example(), StiefelPoint(Matrix::Identity(3, 2))), 5.0);
}

TEST(Objective, SignFlipInvariant) {
  auto c = gen_random_psd(6, 3, 6, 2);
  Rng rng(3);
  Matrix u = random_stiefel(6, 3, rng).mat();
  Matrix v = u;
  v.col(1) *= -1;
  EXPECT_NEAR(objective(c, StiefelPoint(u)), objective(c, StiefelPoint(v)), 1e-14);
}

TEST(EuclideanGradient, ClosedFormsAndFiniteDifferences) {
  ProblemInstance id({SymMat::identity(4)});
  Matrix u = Vector::Unit(4, 2);
  EXPECT_NEAR((euclidean_gradient(id, u) - 2 * u).norm(), 0.0, 1e-15);
  ProblemInstance zero({SymMat::zero(4), SymMat::zero(4)});
  EXPECT_EQ(euclidean_gradient(zero, Matrix::Identity(4, 2)).norm(), 0.0);

  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    auto c = gen_random_psd(7, 3, 4, 50 + t);
    Matrix x = random_stiefel(7, 3, rng).mat();
    Matrix fd = oracle::fd_gradient(oracle::dense(c), x);
    Matrix g = euclidean_gradient(c, x);
    EXPECT_LE((g - fd).norm() / g.norm(), 1e-6);
  }
}

TEST(RiemannianGradient, TangentAndMatchesProjectedFiniteDifferences) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    auto c = gen_random_psd(8, 1 + t % 4, 8, 70 + t);
    Matrix u = random_stiefel(8, c.k(), rng).mat();
    Matrix g = riemannian_gradient(c, u);
    EXPECT_LE((u.transpose() * g + g.transpose() * u).norm(), 1e-10);
    Matrix ref = oracle::tangent_project(u, oracle::fd_gradient(oracle::dense(c), u));
    EXPECT_LE((g - ref).norm() / ref.norm(), 1e-5);
  }
}

TEST(RiemannianGradient, VanishesAtStationaryPoints) {
  ProblemInstance c({SymMat(diag({3, 1}))});
  EXPECT_LE(riemannian_gradient(c, Matrix::Identity(2, 1)).norm(), 1e-15);
  EXPECT_LE(riemannian_gradient(diag_example(), swapped()).norm(), 1e-15);
  EXPECT_LE(riemannian_gradient(diag_example(), Matrix::Identity(3, 2)).norm(), 1e-15);
}

TEST(LambdaMatrix, DirectSubstitution) {
  auto l = lambda_matrix(diag_example(), Matrix::Identity(3, 2));
  Matrix ref = Matrix::Zero(2, 2);
  ref(0, 0) = 3;
  ref(1, 1) = 2;
  EXPECT_NEAR((l.value - ref).norm(), 0.0, 1e-15);
  EXPECT_EQ(l.symmetry_residual, 0.0);

  auto c1 = gen_random_psd(5, 1, 5, 3);
  Rng rng(1);
  Matrix u = random_stiefel(5, 1, rng).mat();
  auto l1 = lambda_matrix(c1, u);
  EXPECT_NEAR(l1.value(0, 0), u.col(0).dot(c1[0].mat() * u.col(0)), 1e-14);
  EXPECT_EQ(l1.symmetry_residual, 0.0);

  auto c = gen_random_psd(6, 3, 6, 4);
  auto lr = lambda_matrix(c, random_stiefel(6, 3, rng).mat());
  EXPECT_GT(lr.symmetry_residual, 1e-6);
}

TEST(Stmm, FirstStepIsPowerIteration) {
  ProblemInstance c({SymMat(diag({3, 1}))});
  Matrix u0(2, 1);
  u0 << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  StmmConfig one;
  one.max_iters = 1;
  auto t1 = stmm_solve(c, StiefelPoint(u0), one);
  Vector ref(2);
  ref << 3, 1;
  ref /= std::sqrt(10.0);
  EXPECT_NEAR((t1.final.mat().col(0) - ref).norm(), 0.0, 1e-14);

  auto full = stmm_solve(c, StiefelPoint(u0));
  EXPECT_EQ(full.status, StmmStatus::Converged);
  EXPECT_NEAR(std::abs(full.final.mat()(0, 0)), 1.0, 1e-10);
}

TEST(Stmm, StartAtMaximumTerminatesImmediately) {
  auto t = stmm_solve(diag_example(), StiefelPoint(Matrix::Identity(3, 2)));
  EXPECT_LE(t.iterations, 1);
  EXPECT_EQ(t.status, StmmStatus::Converged);
}

TEST(Stmm, ZeroInstanceIsStationary) {
  ProblemInstance zero({SymMat::zero(4), SymMat::zero(4)});
  Matrix u0 = Matrix::Identity(4, 2);
  auto t = stmm_solve(zero, StiefelPoint(u0));
  EXPECT_EQ(t.status, StmmStatus::Stationary);
  EXPECT_EQ(t.iterations, 0);
  EXPECT_EQ(t.final.mat(), u0);
}

TEST(Stmm, MonotoneAscentBoundedAndOnManifold) {
  auto model = make_hppca_model(10, 3, default_lambdas(3), Vector::LinSpaced(2, 1, 4), {100, 400}, 9);
  auto c = normalize_instance(build_instance(model, sample(model)));
  auto r = solve_sdp(c);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  Rng rng(10);
  for (int s = 0; s < 100; ++s) {
    StmmConfig cfg;
    cfg.max_iters = 300;
    auto t = stmm_solve(c, random_stiefel(10, 3, rng), cfg);
    for (size_t i = 1; i < t.objectives.size(); ++i) EXPECT_GE(t.objectives[i], t.objectives[i - 1] - 1e-12);
    EXPECT_LE(t.objectives.back(), r.value() + 1e-5);
    EXPECT_LE(t.final.orthonormality_error(), 1e-10);
    EXPECT_NEAR(t.objectives.back(), objective(c, t.final), 1e-12);
  }
}

TEST(Stmm, StationarityConsistency) {
  Rng rng(12);
  for (int s = 0; s < 10; ++s) {
    auto c = gen_cjd(8, 3, 4, 1e-4, 200 + s);
    auto t = stmm_solve(c, random_stiefel(8, 3, rng));
    if (t.status != StmmStatus::Converged) continue;
    Matrix u = t.final.mat();
    Matrix g = euclidean_gradient(c, u);
    EXPECT_LE(lambda_matrix(c, u).symmetry_residual, 1e-6);
    EXPECT_LE((g - u * (u.transpose() * g)).norm(), 1e-6);
  }
}

TEST(Stmm, IndefiniteInputStillAscends) {
  ProblemInstance c({SymMat(diag({-1, -3, 0.5})), SymMat(diag({-2, 1, -1}))});
  Rng rng(2);
  auto t = stmm_solve(c, random_stiefel(3, 2, rng));
  for (size_t i = 1; i < t.objectives.size(); ++i) EXPECT_GE(t.objectives[i], t.objectives[i - 1] - 1e-12);
}

TEST(RandomStiefel, OrthonormalAndSeeded) {
  Rng a(3), b(3);
  auto u = random_stiefel(9, 4, a);
  EXPECT_LE(u.orthonormality_error(), 1e-12);
  EXPECT_EQ(u.mat(), random_stiefel(9, 4, b).mat());
}
