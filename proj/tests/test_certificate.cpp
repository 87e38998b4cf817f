#include <gtest/gtest.h>

#include "hetquad/certificate.hpp"
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

StiefelPoint swapped() {
  Matrix u = Matrix::Zero(3, 2);
  u(1, 0) = 1;
  u(0, 1) = 1;
  return StiefelPoint(u);
}

// Slack of each inequality at nu, recomputed from scratch.
std::vector<double> slacks(const ProblemInstance& c, const Matrix& u, const Vector& nu) {
  const int k = c.k(), d = c.d();
  Matrix lam(k, k);
  for (int i = 0; i < k; ++i) lam.col(i) = u.transpose() * c[i].mat() * u.col(i);
  lam = 0.5 * (lam + lam.transpose());
  Matrix core = lam - Matrix(nu.asDiagonal());
  std::vector<double> out;
  for (int i = 0; i < k; ++i)
    out.push_back(oracle::min_eig(u * core * u.transpose() + nu(i) * Matrix::Identity(d, d) - c[i].mat()));
  out.push_back(oracle::min_eig(core));
  out.push_back(nu.minCoeff());
  return out;
}

HppcaModel tight_model(std::uint64_t seed) {
  return make_hppca_model(12, 3, default_lambdas(3), Vector::LinSpaced(2, 1, 4), {100, 400}, seed);
}

}  // namespace

TEST(Certify, SingleBrockettWitness) {
  ProblemInstance c({SymMat(diag({3, 1}))});
  auto r = certify(c, StiefelPoint(Matrix::Identity(2, 1)));
  ASSERT_EQ(r.status, CertStatus::CertifiedGlobal) << r.message;
  // Any nu in [1, 3] has zero worst slack, so the witness is not unique.
  EXPECT_GE(r.nu_witness(0), 1.0 - 1e-6);
  EXPECT_LE(r.nu_witness(0), 3.0 + 1e-6);
  for (double s : slacks(c, Matrix::Identity(2, 1), r.nu_witness)) EXPECT_GE(s, -3e-7);
  for (double v : r.kkt) EXPECT_LE(v, 1e-6);
  EXPECT_FALSE(r.precondition_weak);
}

TEST(Certify, DiagonalOptimumIsCertified) {
  auto c = diag_example();
  auto r = certify(c, StiefelPoint(Matrix::Identity(3, 2)));
  ASSERT_EQ(r.status, CertStatus::CertifiedGlobal);
  // Slack tolerance is in units of max_i ||M_i|| = 3.
  for (double s : slacks(c, Matrix::Identity(3, 2), r.nu_witness)) EXPECT_GE(s, -3e-7);
}

TEST(Certify, SwappedStationaryPointIsInconclusive) {
  auto c = diag_example();
  auto sdp = solve_sdp(c);
  ASSERT_EQ(sdp.status, SolveStatus::Optimal);
  auto r = certify(c, swapped(), {}, &sdp);
  EXPECT_EQ(r.status, CertStatus::Inconclusive);
  EXPECT_EQ(r.classification, Classification::SuboptimalStationary);
  EXPECT_FALSE(r.precondition_weak);
  // Hand argument: the (3,3) entry forces nu_2 >= 1 while Lambda - D_nu >= 0
  // forces nu_2 <= 0, so no nu is feasible and the best slack is negative.
  EXPECT_LT(r.t, -1e-3);
}

TEST(Certify, NegativeLambdaGateForcesInconclusive) {
  // Stationary point whose Lambda = diag(-1,-1) cannot dominate D_nu >= 0.
  ProblemInstance c({SymMat(diag({-1, 0, 0})), SymMat(diag({0, -1, 0}))});
  auto r = certify(c, StiefelPoint(Matrix::Identity(3, 2)));
  EXPECT_EQ(r.status, CertStatus::Inconclusive);
  EXPECT_EQ(r.classification, Classification::Unknown);
}

TEST(Certify, NonStationaryPointFlagsWeakPrecondition) {
  auto c = gen_random_psd(6, 2, 6, 3);
  Rng rng(5);
  auto r = certify(c, random_stiefel(6, 2, rng));
  EXPECT_TRUE(r.precondition_weak);
  EXPECT_EQ(r.status, CertStatus::Inconclusive);
}

TEST(Certify, EndToEndTightSolveAndSoundness) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto model = tight_model(seed);
    auto c = normalize_instance(build_instance(model, sample(model)));
    auto sdp = solve_sdp(c);
    ASSERT_EQ(sdp.status, SolveStatus::Optimal);
    auto cand = extract_candidate(sdp.primal);
    ASSERT_LE(cand.rop_error, 1e-5);
    auto r = certify(c, cand.u, {}, &sdp);
    ASSERT_EQ(r.status, CertStatus::CertifiedGlobal) << r.message;
    for (double v : r.kkt) EXPECT_LE(v, 1e-6);
    EXPECT_GE(r.nu_witness.minCoeff(), -1e-7);
    for (double s : slacks(c, cand.u.mat(), r.nu_witness)) EXPECT_GE(s, -1e-7 * 1.0001);
    // Proof construction: <Z_i, X_i> = 0.
    const Matrix& u = cand.u.mat();
    Matrix lam(3, 3);
    for (int i = 0; i < 3; ++i) lam.col(i) = u.transpose() * c[i].mat() * u.col(i);
    lam = 0.5 * (lam + lam.transpose());
    Matrix y = u * (lam - Matrix(r.nu_witness.asDiagonal())) * u.transpose();
    for (int i = 0; i < 3; ++i) {
      Matrix z = y + r.nu_witness(i) * Matrix::Identity(12, 12) - c[i].mat();
      EXPECT_NEAR(u.col(i).dot(z * u.col(i)), 0.0, 1e-8);
    }
    // Sampled soundness.
    Rng rng(seed);
    double f = objective(c, cand.u);
    for (int t = 0; t < 10000; ++t) EXPECT_LE(objective(c, random_stiefel(12, 3, rng)), f + 1e-5);
    for (int t = 0; t < 10; ++t) {
      auto tr = stmm_solve(c, random_stiefel(12, 3, rng));
      EXPECT_LE(tr.objectives.back(), f + 1e-5);
    }
  }
}

TEST(ClassifyInconclusive, Branches) {
  auto c = diag_example();
  EXPECT_EQ(classify_inconclusive(c, swapped(), nullptr), Classification::Unknown);
  auto sdp = solve_sdp(c);
  EXPECT_EQ(classify_inconclusive(c, swapped(), &sdp), Classification::SuboptimalStationary);
  EXPECT_EQ(classify_inconclusive(c, StiefelPoint(Matrix::Identity(3, 2)), &sdp), Classification::Unknown);

  auto [x1, x2] = non_rank_one_fixture();
  SolveReport fake;
  fake.status = SolveStatus::Optimal;
  fake.primal.x_blocks = {x1, x2};
  ProblemInstance c4({SymMat::identity(4), SymMat::identity(4)});
  EXPECT_EQ(classify_inconclusive(c4, StiefelPoint(Matrix::Identity(4, 2)), &fake), Classification::SdpNotTight);
}

TEST(FlopsEstimate, RatioIsDCubedOverK) {
  EXPECT_DOUBLE_EQ(certificate_flops_estimate(50, 5).ratio, 25000.0);
  EXPECT_DOUBLE_EQ(certificate_flops_estimate(1, 1).ratio, 1.0);
  EXPECT_LT(certificate_flops_estimate(10, 3).ratio, certificate_flops_estimate(11, 3).ratio);
  EXPECT_GT(certificate_flops_estimate(10, 3).ratio, certificate_flops_estimate(10, 4).ratio);
  auto e = certificate_flops_estimate(20, 4);
  EXPECT_NEAR(e.full_dual_flops / e.cert_flops, e.ratio, 1e-9 * e.ratio);
  EXPECT_THROW(certificate_flops_estimate(0, 1), PreconditionViolation);
}
