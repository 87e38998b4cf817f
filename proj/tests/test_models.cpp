#include <gtest/gtest.h>

#include <cmath>

#include "hetquad/generators.hpp"
#include "hetquad/harness.hpp"
#include "hetquad/hppca.hpp"
#include "hetquad/sdp.hpp"
#include "oracles.hpp"

using namespace hetquad;

namespace {

HppcaModel basic_model(std::vector<int> n, std::vector<double> v, std::uint64_t seed, int d = 6, int k = 2) {
  Vector vv = Eigen::Map<Vector>(v.data(), static_cast<int>(v.size()));
  return make_hppca_model(d, k, default_lambdas(k), vv, std::move(n), seed);
}

}  // namespace

TEST(Hppca, DefaultLambdasAreLinspace) {
  Vector l = default_lambdas(3);
  EXPECT_DOUBLE_EQ(l(0), 1.0);
  EXPECT_DOUBLE_EQ(l(1), 2.5);
  EXPECT_DOUBLE_EQ(l(2), 4.0);
  EXPECT_DOUBLE_EQ(default_lambdas(1)(0), 4.0);
}

TEST(Hppca, Weights) {
  Vector lam(2);
  lam << 1, 4;
  auto m = make_hppca_model(3, 2, lam, Vector::Ones(1), {5}, 1);
  Matrix w = hppca_weights(m);
  EXPECT_DOUBLE_EQ(w(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(w(0, 1), 0.8);
}

TEST(Hppca, ValidateRejectsBadParameters) {
  EXPECT_THROW(make_hppca_model(3, 2, Vector::Ones(2), -Vector::Ones(1), {5}, 1), PreconditionViolation);
  EXPECT_THROW(make_hppca_model(3, 2, Vector::Ones(3), Vector::Ones(1), {5}, 1), DimensionMismatch);
  EXPECT_THROW(make_hppca_model(3, 2, Vector::Ones(2), Vector::Ones(1), {0}, 1), PreconditionViolation);
  EXPECT_THROW(make_hppca_model(3, 2, Vector::Ones(2), Vector::Ones(1), {5}, 1, Matrix::Ones(3, 2)),
               PreconditionViolation);
  EXPECT_FALSE(make_hppca_model(3, 2, Vector::Ones(2), Vector::Ones(1), {5}, 1).distinct_parameters());
  EXPECT_TRUE(basic_model({5, 6}, {1, 4}, 1).distinct_parameters());
}

TEST(Hppca, SampleShapesAndDeterminism) {
  auto m = basic_model({7, 11}, {1, 4}, 5);
  auto a = sample(m), b = sample(m);
  ASSERT_EQ(a.groups.size(), 2u);
  EXPECT_EQ(a.groups[0].cols(), 7);
  EXPECT_EQ(a.groups[1].cols(), 11);
  EXPECT_EQ(a.groups[0], b.groups[0]);
  EXPECT_EQ(a.groups[1], b.groups[1]);
  auto other = basic_model({7, 11}, {1, 4}, 6);
  EXPECT_NE(sample(other).groups[0], a.groups[0]);
}

TEST(Hppca, NoiselessLimitStaysInSubspace) {
  auto m = basic_model({50}, {1e-12}, 3);
  auto s = sample(m);
  const Matrix& u = m.u_true;
  Matrix resid = s.groups[0] - u * (u.transpose() * s.groups[0]);
  EXPECT_LE(resid.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Hppca, EmpiricalCovarianceMatchesModel) {
  Vector lam(2);
  lam << 1, 4;
  Vector v(2);
  v << 0.5, 2.0;
  auto m = make_hppca_model(3, 2, lam, v, {100000, 100000}, 11);
  auto s = sample(m);
  Matrix signal = m.u_true * lam.asDiagonal() * m.u_true.transpose();
  for (int l = 0; l < 2; ++l) {
    const Matrix& y = s.groups[l];
    const double n = static_cast<double>(y.cols());
    Matrix emp = y * y.transpose() / n;
    Matrix sigma = signal + v(l) * Matrix::Identity(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double sd = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / n);
        EXPECT_LE(std::abs(emp(i, j) - sigma(i, j)), 3 * sd) << "group " << l << " entry " << i << "," << j;
      }
    }
  }
}

TEST(Hppca, SingleSampleInstanceIsRankOne) {
  Vector lam = Vector::Constant(1, 2.0);
  auto m = make_hppca_model(4, 1, lam, Vector::Constant(1, 0.5), {1}, 2);
  auto s = sample(m);
  auto c = build_instance(m, s);
  Vector y = s.groups[0].col(0);
  double w = 2.0 / 2.5;
  EXPECT_NEAR((c[0].mat() - w / 0.5 * y * y.transpose()).norm(), 0.0, 1e-12);
  Vector ev = c[0].eigenvalues();
  EXPECT_LE(std::abs(ev(2)), 1e-10 * ev(3));
}

TEST(Hppca, InstanceOrderFollowsLambdas) {
  auto m = basic_model({30, 60}, {1, 4}, 8, 6, 3);
  auto c = build_instance(m, sample(m));
  for (int i = 0; i < 3; ++i) EXPECT_GE(c[i].min_eigenvalue(), -1e-10);
  for (int i = 1; i < 3; ++i) EXPECT_GE(oracle::min_eig(c[i].mat() - c[i - 1].mat()), -1e-10);
}

TEST(Hppca, ExpectedInstanceClosedForm) {
  auto m = make_hppca_model(2, 1, Vector::Ones(1), Vector::Ones(1), {4}, 1, Matrix(Matrix::Identity(2, 1)));
  auto e = expected_instance(m);
  Matrix ref = Matrix::Zero(2, 2);
  ref(0, 0) = 1.0;
  ref(1, 1) = 0.5;
  EXPECT_NEAR((e[0].mat() - ref).norm(), 0.0, 1e-14);

  auto big = basic_model({30, 70}, {1, 4}, 2, 7, 3);
  auto eb = expected_instance(big);
  EXPECT_LE(instance_metrics(eb).max_commuting_distance, 1e-10);
}

TEST(Hppca, StatsClosedFormsAndConsistency) {
  auto m = make_hppca_model(3, 1, Vector::Ones(1), Vector::Ones(1), {10}, 1);
  EXPECT_NEAR(hppca_stats(m).sigma_bar(0), 1.0, 1e-14);

  auto m2 = make_hppca_model(3, 1, Vector::Ones(1), Vector::LinSpaced(2, 1, 4), {10, 10}, 1);
  EXPECT_NEAR(hppca_stats(m2).snr_bounds(0), 1.3, 1e-14);

  auto m3 = basic_model({40, 160}, {1, 4}, 4, 8, 3);
  auto st = hppca_stats(m3, 2.0, 1.5);
  auto e = expected_instance(m3);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(st.sigma_bar(i), oracle::sym_norm(e[i].mat()), 1e-10);
    EXPECT_NEAR(st.xi_bar(i), e[i].trace(), 1e-10);
    EXPECT_GT(st.concentration_bounds(i), 0.0);
    EXPECT_DOUBLE_EQ(st.bounds(i), std::min(st.snr_bounds(i), st.concentration_bounds(i)));
  }
  EXPECT_THROW(hppca_stats(m3, 0.0, 1.0), PreconditionViolation);
}

TEST(Hppca, DeterministicSnrBound) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto m = basic_model({10, 40}, {1, 4}, seed, 8, 3);
    auto s = sample(m);
    auto dev = snr_deviation(m, s);
    auto st = hppca_stats(m);
    // Recompute the left-hand side independently.
    auto c = build_instance(m, s);
    auto a = group_matrices(m, s);
    Matrix abar = Matrix::Zero(8, 8);
    for (const auto& al : a) abar += al.mat();
    abar /= m.n();
    for (int i = 0; i < 3; ++i) {
      double ref = oracle::sym_norm(c[i].mat() / m.n() - abar) / oracle::sym_norm(abar);
      EXPECT_NEAR(dev(i), ref, 1e-12);
      EXPECT_LE(dev(i), st.snr_bounds(i));
    }
  }
}

TEST(Generators, RandomPsdRankAndDeterminism) {
  auto a = gen_random_psd(8, 3, 2, 5);
  auto b = gen_random_psd(8, 3, 2, 5);
  EXPECT_DOUBLE_EQ(instance_distance(a, b), 0.0);
  double mx = 0.0;
  for (int i = 0; i < 3; ++i) {
    Vector ev = a[i].eigenvalues();
    EXPECT_GE(ev(0), -1e-12);
    EXPECT_LE(std::abs(ev(5)), 1e-10);
    EXPECT_GT(ev(6), 1e-6);
    mx = std::max(mx, ev(7));
  }
  EXPECT_NEAR(mx, 1.0, 1e-12);
  auto full = gen_random_psd(6, 2, 6, 1);
  EXPECT_GT(full[0].min_eigenvalue(), 0.0);
}

TEST(Generators, CjdZeroNoiseIsDiagonal) {
  auto c = gen_cjd(10, 3, 4, 0.0, 1);
  EXPECT_EQ(instance_metrics(c).max_commuting_distance, 0.0);
  for (int i = 0; i < 3; ++i) EXPECT_EQ((c[i].mat() - Matrix(c[i].mat().diagonal().asDiagonal())).norm(), 0.0);
}

TEST(Generators, CjdIsNestedAndNoiseRaisesCommutingDistance) {
  for (bool literal : {false, true}) {
    auto c = gen_cjd(10, 4, 5, 1e-2, 3, literal);
    for (int i = 0; i + 1 < 4; ++i) {
      Matrix diff = literal ? Matrix(c[i + 1].mat() - c[i].mat()) : Matrix(c[i].mat() - c[i + 1].mat());
      EXPECT_GE(oracle::min_eig(diff), -1e-12);
    }
  }
  std::vector<double> medians;
  for (double sigma : {1e-4, 1e-3, 1e-2, 1e-1}) {
    std::vector<double> cd;
    for (int s = 0; s < 20; ++s) cd.push_back(instance_metrics(gen_cjd(10, 3, 5, sigma, 100 + s)).max_commuting_distance);
    medians.push_back(harness::median(cd));
  }
  for (size_t i = 1; i < medians.size(); ++i) EXPECT_GT(medians[i], medians[i - 1]);
}

TEST(Generators, NestedOrthogonalVectorsCommute) {
  Matrix r = Matrix::Zero(3, 3);
  r.diagonal() << 1.0, 2.0, 0.5;
  auto e = gen_nested(6, 3, r, 4);
  EXPECT_LE(instance_metrics(e.instance).max_commuting_distance, 1e-12);
  EXPECT_NEAR(e.known_optimum, 1.0 + 4.0 + 0.25, 1e-12);
}

TEST(Generators, NestedRankTwoCase) {
  Matrix r(2, 2);
  r << 1, 1, 0, 1;
  auto e = gen_nested(4, 2, r, 9);
  EXPECT_GT(commuting_distance(e.instance[0], e.instance[1]), 0.5);
  EXPECT_NEAR(e.known_optimum, 3.0, 1e-12);
  EXPECT_NEAR(e.instance[0].trace(), e.vectors.colwise().squaredNorm().sum(), 1e-12);
  auto rep = solve_sdp(e.instance);
  ASSERT_EQ(rep.status, SolveStatus::Optimal);
  EXPECT_NEAR(rep.value(), 3.0, 1e-6);
  EXPECT_LE(rop_error(rep.primal.x_blocks), 1e-5);
}

TEST(Generators, NestedDependentVectorsThrow) {
  Matrix r(2, 2);
  r << 1, 1, 0, 0;
  EXPECT_THROW(gen_nested(4, 2, r, 1), RankDeficient);
}

TEST(Generators, NonRankOneFixture) {
  auto [x1, x2] = non_rank_one_fixture();
  EXPECT_NEAR(x1.trace(), 1.0, 1e-12);
  EXPECT_NEAR(x2.trace(), 1.0, 1e-12);
  auto rank = [](const Matrix& m) {
    Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues();
    return static_cast<int>((ev.array() > 1e-9).count());
  };
  EXPECT_EQ(rank(x1.mat()), 2);
  EXPECT_EQ(rank(x2.mat()), 2);
  Matrix s = x1.mat() + x2.mat();
  EXPECT_EQ(rank(s), 4);
  EXPECT_NEAR(oracle::sym_norm(s), 1.0, 1e-12);
}
